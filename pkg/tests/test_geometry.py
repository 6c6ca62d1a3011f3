import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waveheat.errors import ConfigError
from waveheat.geometry import HEAT, INTERFACE, WAVE, DomainConfig, build_grid


def test_symmetric_split():
    g = build_grid(DomainConfig(1.0, 0.5, 4, 4))
    assert g.nodes.size == 9
    assert g.interface_index == 4
    assert g.h1 == g.h2 == 0.125
    assert g.labels[4] == INTERFACE
    assert g.labels[:4] == (HEAT,) * 4 and g.labels[5:] == (WAVE,) * 4


def test_unequal_lengths():
    g = build_grid(DomainConfig(2.0, 0.5, 10, 30))
    assert g.nodes.size == 41
    assert g.h1 == pytest.approx(0.05, abs=1e-15)
    assert g.h2 == pytest.approx(0.05, abs=1e-15)


@pytest.mark.parametrize("cfg, field", [
    (DomainConfig(1.0, 0.3, 3, 7), "n1"),
    (DomainConfig(1.0, 0.3, 4, 2), "n2"),
    (DomainConfig(1.0, 1.0, 4, 4), "gamma"),
    (DomainConfig(1.0, 1.5, 4, 4), "gamma"),
    (DomainConfig(1.0, 0.0, 4, 4), "gamma"),
    (DomainConfig(-1.0, 0.5, 4, 4), "length"),
    (DomainConfig(1.0, 0.5, 4.5, 4), "n1"),
])
def test_rejects_invalid(cfg, field):
    with pytest.raises(ConfigError) as exc:
        build_grid(cfg)
    assert exc.value.field == field


@settings(max_examples=60, deadline=None)
@given(length=st.floats(0.1, 10.0), frac=st.floats(0.05, 0.95),
       n1=st.integers(4, 300), n2=st.integers(4, 300))
def test_grid_properties(length, frac, n1, n2):
    gamma = frac * length
    cfg = DomainConfig(length, gamma, n1, n2)
    g = build_grid(cfg)
    assert g.nodes.size == n1 + n2 + 1
    assert g.nodes[0] == 0.0 and g.nodes[-1] == length
    assert g.nodes[g.interface_index] == gamma
    assert np.all(np.diff(g.nodes) > 0)
    np.testing.assert_allclose(np.diff(g.heat_nodes), g.h1, rtol=1e-9)
    np.testing.assert_allclose(np.diff(g.wave_nodes), g.h2, rtol=1e-9)
    assert build_grid(DomainConfig(length, gamma, n1, n2)) == g

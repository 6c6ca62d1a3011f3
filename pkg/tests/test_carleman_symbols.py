import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waveheat.carleman.symbols import (E_MINUS, E_PLUS, ZERO, SymbolPoint, check_root_signs,
                                       classify_region, interface_identities, quadratic_roots,
                                       region_expression, root_residual, sample_points,
                                       sample_region, symbol, symbol_roots, tangential_symbols,
                                       write_region_map, zero_set_xi)
from waveheat.carleman.weights import WeightConfig, eval_weights

WC = WeightConfig(1.0, 1.0, 5.0)

points = st.tuples(st.floats(-0.25, 0.25), st.floats(0.0, 0.25), st.floats(-200, 200),
                   st.floats(0.5, 50))


def test_symbol_point_invariants():
    with pytest.raises(ValueError):
        SymbolPoint(0.0, 0.0, 1.0, 0.0)
    pt = SymbolPoint(0.0, 0.0, 3.0, 4.0)
    assert pt.lam == 5.0


def test_symmetry_axis():
    for j in (1, 2):
        pt = SymbolPoint(0.0, 0.1, 7.0, 3.0)
        q1, q2 = tangential_symbols(WC, pt, j)
        gn = eval_weights(WC, 0.0, 0.1).d_xn[j - 1]
        assert q1 == 0.0
        assert q2 == pytest.approx(49.0 - (3.0 * gn) ** 2, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(p=points, c=st.floats(0.1, 10))
def test_homogeneity(p, c):
    xp, xn, xi, mu = p
    for j in (1, 2):
        q1, q2 = tangential_symbols(WC, SymbolPoint(xp, xn, xi, mu), j)
        r1, r2 = tangential_symbols(WC, SymbolPoint(xp, xn, c * xi, c * mu), j)
        assert r2 == pytest.approx(c**2 * q2, rel=1e-9, abs=1e-9 * c**2 * (xi**2 + mu**2))
        assert r1 == pytest.approx(c * q1, rel=1e-12, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(p=points)
def test_roots_residual_vieta_oracle(p):
    pt = SymbolPoint(*p)
    for j in (1, 2):
        ev = symbol_roots(WC, pt, j)
        lam2 = pt.lam**2
        assert root_residual(WC, pt, j) <= 1e-10
        gn = eval_weights(WC, pt.x_prime, pt.x_n).d_xn[j - 1]
        assert abs(ev.z_plus + ev.z_minus + 2j * pt.mu * gn) <= 1e-10 * pt.lam * max(1, abs(gn))
        # product of roots equals the constant coefficient of the expanded quadratic
        const = symbol(WC, pt, 0.0, j)
        assert abs(ev.z_plus * ev.z_minus - const) <= 1e-10 * lam2 * max(1, gn**2)
        r1, r2 = quadratic_roots(WC, pt, j)
        d = min(max(abs(ev.z_plus - r1), abs(ev.z_minus - r2)),
                max(abs(ev.z_plus - r2), abs(ev.z_minus - r1)))
        # near a double root (alpha -> 0) the roots are only sqrt(eps)-conditioned
        scale = pt.lam * max(1, abs(gn))
        assert d <= scale * (1e-9 + min(1e-7, 1e-14 * scale / max(abs(ev.alpha), 1e-300)))
        assert np.real(ev.alpha) >= 0


def test_alpha_sq_literal_matches_only_at_interface():
    pt0 = SymbolPoint(0.1, 0.0, 5.0, 3.0)
    ev = symbol_roots(WC, pt0, 2)
    # at x_n = 0 the two expressions differ by exactly (mu d phi_2)^2 - (mu d phi_1)^2 + ...
    _, q21 = tangential_symbols(WC, pt0, 1)
    _, q22 = tangential_symbols(WC, pt0, 2)
    assert ev.alpha_sq - ev.alpha_sq_literal == pytest.approx(q22 - q21, rel=1e-12)
    ev1 = symbol_roots(WC, pt0, 1)
    assert np.array_equal(ev1.alpha_sq, ev1.alpha_sq_literal)


def test_region_examples():
    large = SymbolPoint(0.1, 0.1, 1e4, 2.0)
    small = SymbolPoint(0.1, 0.1, 0.0, 30.0)
    for j in (1, 2):
        assert classify_region(WC, large, j) == E_PLUS
        assert classify_region(WC, small, j) == E_MINUS


def test_classify_undefined_when_normal_derivative_vanishes():
    # d_n phi_2 = 0 where 2 (x_n + delta) = alpha
    wc = WeightConfig(1.0, 1.9, 5.0)
    with pytest.raises(ValueError):
        region_expression(wc, SymbolPoint(0.0, -0.05, 1.0, 1.0), 2)


def test_hand_built_zero_point():
    for j in (1, 2):
        xi = zero_set_xi(WC, 0.12, 0.05, 7.0, j)
        pt = SymbolPoint(0.12, 0.05, xi, 7.0)
        assert abs(region_expression(WC, pt, j)) <= 1e-10 * pt.lam**2
        assert classify_region(WC, pt, j) == ZERO
        r1, r2 = quadratic_roots(WC, pt, j)
        assert min(abs(r1.imag), abs(r2.imag)) <= 1e-8 * pt.lam


def test_e_plus_root_signs():
    pt = SymbolPoint(0.0, 0.0, 500.0, 3.0)
    ev = symbol_roots(WC, pt, 1)
    assert ev.z_plus.imag > 0 > ev.z_minus.imag


@pytest.mark.parametrize("j", [1, 2])
@pytest.mark.parametrize("region", [E_PLUS, ZERO, E_MINUS])
def test_root_signs_by_region(j, region):
    rng = np.random.default_rng(7 + j)
    pt = sample_region(WC, rng, 2000, region, j)
    rep = check_root_signs(WC, pt, j)
    assert np.all(rep.labels == region)
    assert rep.n_disagree == 0 and rep.passed


def test_root_signs_detect_wrong_labels(monkeypatch):
    # E_minus samples relabelled E_plus must be reported as disagreements
    import waveheat.carleman.symbols as sym
    rng = np.random.default_rng(3)
    pt = sample_region(WC, rng, 200, E_MINUS, 1)
    monkeypatch.setattr(sym, "classify_region",
                        lambda *a, **k: np.full(pt.mu.shape, E_PLUS))
    rep = sym.check_root_signs(WC, pt, 1)
    assert rep.n_disagree == 200 and not rep.passed


def test_interface_identities():
    rng = np.random.default_rng(11)
    pt = sample_points(rng, 5000, wc=WC, interface=True)
    ids = interface_identities(WC, pt)
    assert ids.gap_err.max() <= 1e-12
    assert ids.gap_implies_order.all()
    l1 = classify_region(WC, pt, 1)
    l2 = classify_region(WC, pt, 2)
    assert np.all(l2[(l1 == E_PLUS) & ids.gap_gt_one] == E_PLUS)
    with pytest.raises(ValueError):
        interface_identities(WC, SymbolPoint(0.0, 0.1, 1.0, 1.0))


def test_region_map_csv(tmp_path):
    rng = np.random.default_rng(0)
    pt = sample_points(rng, 30, wc=WC)
    write_region_map(tmp_path / "m.csv", WC, pt)
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "x_prime,x_n,xi_prime,mu,label_j1,label_j2"
    assert len(lines) == 31
    assert {ln.rsplit(",", 2)[1] for ln in lines[1:]} <= {E_PLUS, ZERO, E_MINUS}

import numpy as np
import pytest

from waveheat.errors import NumericalError, SpectralHitError
from waveheat.generator import apply_generator
from waveheat.spectral import (eigenvalues, heat_h1_ratio, resolvent_apply, resolvent_norm,
                               resolvent_sweep, spectral_distance)

from conftest import make_generator


def test_decoupled_heat_block():
    g = make_generator(100, 10, "decoupled")
    heat, _, _ = g.block_slices()
    rep = eigenvalues(g, block=heat)
    exact = -(np.arange(1, 6) * np.pi / 0.5) ** 2
    np.testing.assert_allclose(rep.eigenvalues[:5].real, exact, rtol=0.01)
    assert np.all(rep.eigenvalues.imag == 0)


def test_decoupled_wave_block_is_skew():
    g = make_generator(10, 60, "decoupled")
    _, v, w = g.block_slices()
    rep = eigenvalues(g, block=slice(v.start, w.stop))
    assert np.abs(rep.eigenvalues.real).max() <= 1e-8
    # discrete stencil frequencies 2/h sin(k pi h / (2 (L - gamma)))
    h = g.grid.h2
    k = np.arange(1, 60)
    freq = np.sort(2 / h * np.sin(k * np.pi * h / (2 * 0.5)))
    np.testing.assert_allclose(np.sort(np.abs(rep.eigenvalues.imag))[::2], freq, rtol=1e-10)


def test_coupled_spectrum():
    g = make_generator(40, 40, gamma=0.4)
    rep = eigenvalues(g)
    assert rep.eigenvalues.size == g.dimension
    assert rep.max_real <= 1e-8 and rep.dissipative
    assert rep.residuals_ok
    assert rep.conjugate_pairing_error() <= 1e-8
    # no eigenvalue on the imaginary axis: the coupling damps every mode
    assert rep.max_real < 0


def test_dense_limit():
    g = make_generator(20, 20)
    with pytest.raises(NumericalError):
        eigenvalues(g, dense_limit=10)


def test_round_trip(rng):
    g = make_generator(40, 30)
    for mu in (0.0, 1.3, 17.0, -4.0):
        x = rng.standard_normal(g.dimension) + 1j * rng.standard_normal(g.dimension)
        f = g.matrix @ x - 1j * mu * x
        y = resolvent_apply(g, mu, f).data
        assert np.sqrt(g.norm_sq(y - x) / g.norm_sq(x)) <= 1e-8


def test_mu_zero_stationary(rng):
    g = make_generator(20, 20)
    f = g.matrix @ rng.standard_normal(g.dimension)
    u = resolvent_apply(g, 0.0, f)
    np.testing.assert_allclose(apply_generator(g, u).data, f, rtol=0, atol=1e-9 * np.abs(f).max())


def test_near_eigenvalue_amplification(rng):
    g = make_generator(30, 30)
    lam = eigenvalues(g).eigenvalues
    top = lam[np.argmax(lam.imag * (lam.real > -5))]
    mu = top.imag
    dist = spectral_distance(lam, mu)
    f = rng.standard_normal(g.dimension)
    y = resolvent_apply(g, mu, f).data
    # the resolvent amplifies some direction by at least 1/dist; check the norm too
    assert resolvent_norm(g, mu) >= 1 / dist - 1e-6
    assert resolvent_norm(g, mu) > 1 / (2 * dist)
    assert np.isfinite(g.norm_sq(y))


def test_spectral_hit():
    a = np.diag([-1.0, 2j, -3.0 + 1j])
    with pytest.raises(SpectralHitError):
        resolvent_norm(a, 2.0, method="dense")
    g = make_generator(4, 4, "decoupled")
    _, v, w = g.block_slices()
    lam = eigenvalues(g, block=slice(v.start, w.stop)).eigenvalues
    mu = float(np.max(lam.imag))
    with pytest.raises(SpectralHitError) as exc:
        resolvent_apply(g, mu, np.ones(g.dimension))
    assert exc.value.nearest is not None
    assert exc.value.operation == "resolvent"


@pytest.mark.parametrize("method", ["lanczos", "dense"])
def test_diagonal_harness(method):
    lam = np.array([-0.5 + 3j, -2.0, -0.1 - 7j, -1.0 + 0.5j, -0.3 + 12j, -4 + 1j])
    a = np.diag(lam)
    for mu in np.geomspace(0.5, 20, 12):
        exact = 1 / np.abs(lam - 1j * mu).min()
        assert resolvent_norm(a, mu, method=method) == pytest.approx(exact, rel=1e-10)
    sw = resolvent_sweep(a, 0.5, 20, 12, method=method)
    np.testing.assert_allclose(sw.norms, [1 / np.abs(lam - 1j * m).min() for m in sw.mu],
                               rtol=1e-10)


def test_lanczos_matches_dense():
    g = make_generator(30, 30)
    for mu in (1.0, 9.5, 40.0):
        a, b = resolvent_norm(g, mu, "lanczos"), resolvent_norm(g, mu, "dense")
        assert a == pytest.approx(b, rel=1e-6)


def test_self_convergence():
    mus = np.geomspace(1, 20, 15)
    coarse = resolvent_sweep(make_generator(100, 100), 1, 20, 15).norms
    fine = resolvent_sweep(make_generator(200, 200), 1, 20, 15).norms
    assert np.max(np.abs(fine - coarse) / fine) <= 0.05
    assert mus.size == coarse.size


def test_conjugation_symmetry():
    g = make_generator(30, 30)
    for mu in (0.7, 5.0, 33.0):
        assert resolvent_norm(g, -mu) == pytest.approx(resolvent_norm(g, mu), rel=1e-8)


def test_sweep_fits_and_outputs(tmp_path):
    g = make_generator(20, 20)
    sw = resolvent_sweep(g, 1, 50, 12, workers=2)
    assert np.all(np.diff(sw.mu) > 0) and np.all(sw.norms > 0)
    serial = resolvent_sweep(g, 1, 50, 12)
    np.testing.assert_array_equal(sw.norms, serial.norms)
    assert np.isfinite(sw.exp_slope) and np.isfinite(sw.poly_exponent)
    lo = np.log(sw.norms[0]) + sw.envelope_slope * (sw.mu - sw.mu[0])
    assert np.all(sw.log_norms <= lo + 1e-12)
    sw.to_csv(tmp_path / "s.csv")
    sw.write_fit_json(tmp_path / "s.json")
    assert (tmp_path / "s.csv").read_text().startswith("mu,norm,log_norm\n")
    with pytest.raises(ValueError):
        resolvent_sweep(g, 1, 50, 1)


def test_heat_h1_ratio_bounded(rng):
    x = np.linspace(0, 1, 401)
    u = np.sin(3 * x) + x**2 + 0.2
    ratios = [heat_h1_ratio(u, 1.0, mu) for mu in np.geomspace(1, 1e3, 20)]
    assert max(ratios) < 10
    assert all(r > 0 for r in ratios)

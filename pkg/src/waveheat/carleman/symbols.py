"""Conjugated symbols, their roots in xi_n and the microlocal regions.

Model: n = 2, flat interface, r_j(x, xi') = xi'^2 and its bilinear form
r~(x, xi', eta') = xi' eta'.  The principal symbols of the conjugated
operators are

    p_j(x, xi, mu) = (xi_n + i mu d_n phi_j)^2 + (xi' + i mu d' phi_j)^2 - kappa_j mu^2

with kappa_1 = 0 (the -mu of P_1 is lower order) and kappa_2 = 1.  As a
polynomial in xi_n,

    p_j = xi_n^2 + 2 i mu d_n phi_j xi_n + q_{2,j} - kappa_j mu^2 + 2 i mu q_{1,j}

with the tangential symbols q_{2,j} = xi'^2 - (mu d_n phi_j)^2 - mu^2 (d' phi_j)^2
and q_{1,j} = xi' d' phi_j.

All functions are vectorised: every field of a SymbolPoint may be an array.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .weights import WeightConfig, eval_weights

E_PLUS, ZERO, E_MINUS = "E_plus", "Z", "E_minus"
KAPPA = {1: 0.0, 2: 1.0}


@dataclass(frozen=True)
class SymbolPoint:
    """Phase-space sample(s) (x', x_n, xi', mu); fields broadcast together."""

    x_prime: np.ndarray
    x_n: np.ndarray
    xi_prime: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        arrs = np.broadcast_arrays(*(np.asarray(getattr(self, f), dtype=float)
                                     for f in ("x_prime", "x_n", "xi_prime", "mu")))
        for f, a in zip(("x_prime", "x_n", "xi_prime", "mu"), arrs):
            object.__setattr__(self, f, a)
        if np.any(self.mu <= 0):
            raise ValueError("mu must be positive")

    @property
    def lam(self) -> np.ndarray:
        """<xi', mu> = (xi'^2 + mu^2)^(1/2)."""
        return np.hypot(self.xi_prime, self.mu)

    def __len__(self):
        return self.mu.size


def _check_j(j):
    if j not in (1, 2):
        raise ValueError(f"j must be 1 or 2, got {j!r}")


def _grads(wc, pt, j):
    we = eval_weights(wc, pt.x_prime, pt.x_n)
    return we.d_xp[j - 1], we.d_xn[j - 1]


def tangential_symbols(wc: WeightConfig, pt: SymbolPoint, j: int):
    """(q_{1,j}, q_{2,j}) at ``pt``."""
    _check_j(j)
    gp, gn = _grads(wc, pt, j)
    xi, mu = pt.xi_prime, pt.mu
    q2 = xi**2 - (mu * gn) ** 2 - mu**2 * gp**2
    q1 = xi * gp
    return q1, q2


def symbol(wc: WeightConfig, pt: SymbolPoint, xi_n, j: int):
    """p_j(x, xi', xi_n, mu); ``xi_n`` may be complex."""
    _check_j(j)
    gp, gn = _grads(wc, pt, j)
    mu = pt.mu
    return (xi_n + 1j * mu * gn) ** 2 + (pt.xi_prime + 1j * mu * gp) ** 2 - KAPPA[j] * mu**2


@dataclass
class RootEval:
    alpha_sq: np.ndarray
    alpha: np.ndarray
    z_plus: np.ndarray
    z_minus: np.ndarray
    # alpha_2^2 as literally displayed with q_{2,1}; equals alpha_sq for j = 1
    alpha_sq_literal: np.ndarray


def symbol_roots(wc: WeightConfig, pt: SymbolPoint, j: int) -> RootEval:
    """alpha_j^2 and the roots z_j^{+-} = -i mu d_n phi_j +- i alpha_j.

    alpha_j is the principal square root (branch cut on the negative reals),
    so Re alpha_j >= 0.
    """
    _check_j(j)
    _, gn = _grads(wc, pt, j)
    mu = pt.mu
    q1, q2 = tangential_symbols(wc, pt, j)
    alpha_sq = (mu * gn) ** 2 + q2 - KAPPA[j] * mu**2 + 2j * mu * q1
    if j == 2:
        _, q21 = tangential_symbols(wc, pt, 1)
        literal = (mu * gn) ** 2 - mu**2 + q21 + 2j * mu * q1
    else:
        literal = alpha_sq
    alpha = np.sqrt(alpha_sq + 0j)
    base = -1j * mu * gn
    return RootEval(alpha_sq, alpha, base + 1j * alpha, base - 1j * alpha, literal)


def quadratic_roots(wc: WeightConfig, pt: SymbolPoint, j: int):
    """Roots of p_j in xi_n from the expanded coefficients (independent oracle).

    Uses the cancellation-free form r1 = -(b + s)/2, r2 = c / r1 with the
    sign of s = sqrt(b^2 - 4c) chosen to maximise |b + s|.
    """
    _check_j(j)
    gp, gn = _grads(wc, pt, j)
    mu = pt.mu
    b = 2j * mu * gn
    c = (pt.xi_prime + 1j * mu * gp) ** 2 - (mu * gn) ** 2 - KAPPA[j] * mu**2
    s = np.sqrt(b * b - 4 * c + 0j)
    t = np.where(np.abs(b + s) >= np.abs(b - s), b + s, b - s)
    r1 = -t / 2
    safe = np.abs(r1) > 0
    r2 = np.where(safe, c / np.where(safe, r1, 1.0), -b / 2)
    return r1, r2


def region_expression(wc: WeightConfig, pt: SymbolPoint, j: int):
    """q_{2,j} - kappa_j mu^2 + q_{1,j}^2 / (d_n phi_j)^2.

    Its sign decides whether Re alpha_j exceeds mu |d_n phi_j|.  For j = 2 the
    -mu^2 is the tangential part of p_2 = a_2 - mu^2.
    """
    _, gn = _grads(wc, pt, j)
    if np.any(gn == 0):
        raise ValueError("d phi_j / d x_n vanishes: region classification undefined")
    q1, q2 = tangential_symbols(wc, pt, j)
    return q2 - KAPPA[j] * pt.mu**2 + q1**2 / gn**2


def classify_region(wc: WeightConfig, pt: SymbolPoint, j: int, zero_band: float = 1e-6):
    """E_plus / Z / E_minus per sample; the Z band is zero_band * <xi', mu>^2."""
    d = region_expression(wc, pt, j)
    band = zero_band * pt.lam**2
    return np.where(d > band, E_PLUS, np.where(d < -band, E_MINUS, ZERO))


@dataclass
class RootSignReport:
    labels: np.ndarray
    agree: np.ndarray
    branch_agree: np.ndarray
    oracle_roots: tuple
    z_tol: np.ndarray

    @property
    def n_disagree(self) -> int:
        return int((~self.agree).sum())

    @property
    def passed(self) -> bool:
        return bool(self.agree.all() and self.branch_agree.all())


def check_root_signs(wc: WeightConfig, pt: SymbolPoint, j: int,
                     zero_band: float = 1e-6, set_tol: float = 1e-9) -> RootSignReport:
    """Compare each sample's region with the imaginary parts of the oracle roots.

    E_plus: one root in each open half-plane, and Im z^+ > 0 > Im z^-.
    Z: one root has |Im| <= z_tol, where z_tol = 4 * band / (2 mu |d_n phi|)
    (linearisation of Re alpha - mu |d_n phi| across the band) + 1e-9 <xi', mu>.
    E_minus: both roots have Im of sign -sign(d_n phi_j).

    ``branch_agree`` checks that the roots from alpha_j match the oracle as
    sets to ``set_tol`` * <xi', mu>.
    """
    labels = classify_region(wc, pt, j, zero_band)
    _, gn = _grads(wc, pt, j)
    lam = pt.lam
    r1, r2 = quadratic_roots(wc, pt, j)
    im1, im2 = r1.imag, r2.imag
    ev = symbol_roots(wc, pt, j)
    z_tol = 4 * zero_band * lam**2 / (2 * pt.mu * np.abs(gn)) + 1e-9 * lam
    plus_ok = (np.minimum(im1, im2) < 0) & (np.maximum(im1, im2) > 0) \
        & (ev.z_plus.imag > 0) & (ev.z_minus.imag < 0)
    zero_ok = np.minimum(np.abs(im1), np.abs(im2)) <= z_tol
    side = -np.sign(gn)
    minus_ok = (np.sign(im1) == side) & (np.sign(im2) == side)
    agree = np.where(labels == E_PLUS, plus_ok, np.where(labels == E_MINUS, minus_ok, zero_ok))
    d_direct = np.maximum(np.abs(ev.z_plus - r1), np.abs(ev.z_minus - r2))
    d_swap = np.maximum(np.abs(ev.z_plus - r2), np.abs(ev.z_minus - r1))
    branch = np.minimum(d_direct, d_swap) <= set_tol * lam
    return RootSignReport(labels, agree, branch, (r1, r2), z_tol)


def root_residual(wc: WeightConfig, pt: SymbolPoint, j: int):
    """max |p_j(z^{+-})| / <xi', mu>^2."""
    ev = symbol_roots(wc, pt, j)
    lam2 = pt.lam**2
    return np.maximum(np.abs(symbol(wc, pt, ev.z_plus, j)),
                      np.abs(symbol(wc, pt, ev.z_minus, j))) / lam2


# sampling ---------------------------------------------------------------------

def zero_set_xi(wc: WeightConfig, x_prime, x_n, mu, j: int):
    """|xi'| at which the region expression vanishes.

    The expression is xi'^2 (1 + (d'phi/d_n phi)^2) - mu^2 ((d_n phi)^2 + (d'phi)^2 + kappa_j),
    linear and increasing in xi'^2.
    """
    we = eval_weights(wc, x_prime, x_n)
    gp, gn = we.d_xp[j - 1], we.d_xn[j - 1]
    mu = np.asarray(mu, float)
    return np.sqrt(mu**2 * (gn**2 + gp**2 + KAPPA[j]) / (1 + (gp / gn) ** 2))


def sample_region(wc: WeightConfig, rng: np.random.Generator, n: int, region: str, j: int,
                  x_prime_range=(-0.25, 0.25), x_n_range=(0.0, 0.25), mu_range=(1.0, 50.0),
                  interface: bool = False) -> SymbolPoint:
    """``n`` random points of the requested region for operator ``j``.

    x and mu are drawn uniformly; xi' is placed relative to the zero set of
    the region expression (factor in (1.05, 4) for E_plus, (0, 0.95) for
    E_minus, exactly on it for Z) with a random sign.
    """
    xp = rng.uniform(*x_prime_range, size=n)
    xn = np.zeros(n) if interface else rng.uniform(*x_n_range, size=n)
    mu = rng.uniform(*mu_range, size=n)
    xi0 = zero_set_xi(wc, xp, xn, mu, j)
    if region == E_PLUS:
        scale = rng.uniform(1.05, 4.0, size=n)
    elif region == E_MINUS:
        scale = rng.uniform(0.0, 0.95, size=n)
    elif region == ZERO:
        scale = np.ones(n)
    else:
        raise ValueError(f"unknown region {region!r}")
    sign = rng.choice([-1.0, 1.0], size=n)
    return SymbolPoint(xp, xn, sign * scale * xi0, mu)


def sample_points(rng: np.random.Generator, n: int, x_prime_range=(-0.25, 0.25),
                  x_n_range=(0.0, 0.25), mu_range=(1.0, 50.0), xi_scale: float = 4.0,
                  wc: WeightConfig | None = None, interface: bool = False) -> SymbolPoint:
    """Uniform samples with |xi'| <= xi_scale * mu * max|grad phi| (or xi_scale * mu)."""
    xp = rng.uniform(*x_prime_range, size=n)
    xn = np.zeros(n) if interface else rng.uniform(*x_n_range, size=n)
    mu = rng.uniform(*mu_range, size=n)
    if wc is None:
        bound = xi_scale * mu
    else:
        we = eval_weights(wc, xp, xn)
        bound = xi_scale * mu * np.max(np.hypot(we.d_xp, we.d_xn), axis=0)
    return SymbolPoint(xp, xn, rng.uniform(-1, 1, size=n) * bound, mu)


# interface identities -----------------------------------------------------------

@dataclass
class InterfaceIdentities:
    """q_{2,2} - q_{2,1} against (mu d_n phi_1)^2 - (mu d_n phi_2)^2 on {x_n = 0},
    and the comparison of the two region expressions."""

    gap_lhs: np.ndarray
    gap_rhs: np.ndarray
    gap_scale: np.ndarray
    gap_gt_one: np.ndarray
    region_order: np.ndarray

    @property
    def gap_err(self) -> np.ndarray:
        return np.abs(self.gap_lhs - self.gap_rhs) / self.gap_scale

    @property
    def gap_implies_order(self) -> np.ndarray:
        """A normal-derivative gap above one implies the region-expression inequality there."""
        return ~self.gap_gt_one | self.region_order


def interface_identities(wc: WeightConfig, pt: SymbolPoint) -> InterfaceIdentities:
    if np.any(pt.x_n != 0):
        raise ValueError("interface identities are evaluated on x_n = 0")
    we = eval_weights(wc, pt.x_prime, pt.x_n)
    mu = pt.mu
    _, q21 = tangential_symbols(wc, pt, 1)
    _, q22 = tangential_symbols(wc, pt, 2)
    d1, d2 = we.d_xn
    rhs = (mu * d1) ** 2 - (mu * d2) ** 2
    gmax = np.max(np.abs(np.concatenate([we.d_xp, we.d_xn])), axis=0)
    scale = mu**2 * gmax**2
    region_2 = region_expression(wc, pt, 2)
    region_1 = region_expression(wc, pt, 1)
    return InterfaceIdentities(q22 - q21, rhs, scale, d1**2 - d2**2 > 1, region_2 > region_1)


def write_region_map(path, wc: WeightConfig, pt: SymbolPoint, zero_band: float = 1e-6) -> None:
    l1 = classify_region(wc, pt, 1, zero_band)
    l2 = classify_region(wc, pt, 2, zero_band)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x_prime", "x_n", "xi_prime", "mu", "label_j1", "label_j2"])
        for i in range(pt.mu.size):
            wr.writerow([f"{pt.x_prime.flat[i]:.17g}", f"{pt.x_n.flat[i]:.17g}",
                         f"{pt.xi_prime.flat[i]:.17g}", f"{pt.mu.flat[i]:.17g}",
                         l1.flat[i], l2.flat[i]])

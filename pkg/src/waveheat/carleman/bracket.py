"""Hormander's sub-ellipticity condition for the conjugated symbols.

For real xi = (xi', xi_n),

    Re p_j     = |xi|^2 - mu^2 |grad phi_j|^2 - kappa_j mu^2
    Im p_j/2mu = xi . grad phi_j

and with {f, g} = sum_k (d_xi_k f d_x_k g - d_x_k f d_xi_k g),

    {Re p_j, Im p_j / 2mu} = 2 xi^T phi_j'' xi + 2 mu^2 grad phi_j^T phi_j'' grad phi_j.

Substituting phi'' = beta phi (beta grad s grad s^T - 2 I) splits the bracket as

    2 beta phi (beta * T_beta - 2 * T_curv),
    T_beta = (xi . grad s)^2 + mu^2 (grad phi . grad s)^2,
    T_curv = |xi|^2 + mu^2 |grad phi|^2,

so a large enough beta makes it positive wherever T_beta > 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symbols import KAPPA
from .weights import WeightConfig, eval_weights


@dataclass(frozen=True)
class PhasePoint:
    """Full phase-space sample(s) (x', x_n, xi', xi_n, mu)."""

    x_prime: np.ndarray
    x_n: np.ndarray
    xi_prime: np.ndarray
    xi_n: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        names = ("x_prime", "x_n", "xi_prime", "xi_n", "mu")
        arrs = np.broadcast_arrays(*(np.asarray(getattr(self, f), dtype=float) for f in names))
        for f, a in zip(names, arrs):
            object.__setattr__(self, f, a)
        if np.any(self.mu <= 0):
            raise ValueError("mu must be positive")

    @property
    def lam_sq(self):
        """<xi, mu>^2."""
        return self.xi_prime**2 + self.xi_n**2 + self.mu**2


def re_im_parts(wc: WeightConfig, pt: PhasePoint, j: int):
    """(Re p_j, Im p_j / 2 mu), from the complex symbol."""
    we = eval_weights(wc, pt.x_prime, pt.x_n)
    gp, gn = we.grad(j)
    mu = pt.mu
    p = (pt.xi_n + 1j * mu * gn) ** 2 + (pt.xi_prime + 1j * mu * gp) ** 2 - KAPPA[j] * mu**2
    return p.real, p.imag / (2 * mu)


def poisson_bracket(wc: WeightConfig, pt: PhasePoint, j: int):
    we = eval_weights(wc, pt.x_prime, pt.x_n)
    gp, gn = we.grad(j)
    hpp, hpn, hnn = we.hess(j)
    xp, xn, mu = pt.xi_prime, pt.xi_n, pt.mu
    quad_xi = hpp * xp**2 + 2 * hpn * xp * xn + hnn * xn**2
    quad_g = hpp * gp**2 + 2 * hpn * gp * gn + hnn * gn**2
    return 2 * quad_xi + 2 * mu**2 * quad_g


def bracket_terms(wc: WeightConfig, pt: PhasePoint, j: int):
    """(T_beta, T_curv) with bracket = 2 beta phi (beta T_beta - 2 T_curv)."""
    we = eval_weights(wc, pt.x_prime, pt.x_n)
    gp, gn = we.grad(j)
    sp_, sn = we.phase_xp[j - 1], we.phase_xn[j - 1]
    mu = pt.mu
    t_beta = (pt.xi_prime * sp_ + pt.xi_n * sn) ** 2 + mu**2 * (gp * sp_ + gn * sn) ** 2
    t_curv = pt.xi_prime**2 + pt.xi_n**2 + mu**2 * (gp**2 + gn**2)
    return t_beta, t_curv


def sufficient_beta(wc: WeightConfig, pt: PhasePoint, j: int):
    """Pointwise beta above which the bracket is positive, phi held fixed: 2 T_curv / T_beta."""
    t_beta, t_curv = bracket_terms(wc, pt, j)
    return 2 * t_curv / t_beta


def poisson_bracket_fd(wc: WeightConfig, pt: PhasePoint, j: int, step: float = 1e-5):
    """Same bracket from centred differences of Re p_j and Im p_j / 2mu."""
    base = dict(x_prime=pt.x_prime, x_n=pt.x_n, xi_prime=pt.xi_prime, xi_n=pt.xi_n, mu=pt.mu)

    def diff(var):
        hi = PhasePoint(**{**base, var: base[var] + step})
        lo = PhasePoint(**{**base, var: base[var] - step})
        fh, gh = re_im_parts(wc, hi, j)
        fl, gl = re_im_parts(wc, lo, j)
        return (fh - fl) / (2 * step), (gh - gl) / (2 * step)

    f_xp, g_xp = diff("x_prime")
    f_xn, g_xn = diff("x_n")
    f_kp, g_kp = diff("xi_prime")
    f_kn, g_kn = diff("xi_n")
    return f_kp * g_xp + f_kn * g_xn - f_xp * g_kp - f_xn * g_kn


def characteristic_samples(wc: WeightConfig, x_prime, x_n, mu, j: int,
                           orientation=1.0) -> PhasePoint:
    """Exact characteristic points: xi perpendicular to grad phi with
    |xi|^2 = mu^2 (|grad phi|^2 + kappa_j)."""
    we = eval_weights(wc, x_prime, x_n)
    gp, gn = we.grad(j)
    mu = np.asarray(mu, float)
    norm = np.hypot(gp, gn)
    size = mu * np.sqrt(norm**2 + KAPPA[j])
    o = np.asarray(orientation, float)
    return PhasePoint(x_prime, x_n, -o * size * gn / norm, o * size * gp / norm, mu)


@dataclass
class H2Report:
    flagged: np.ndarray
    bracket: np.ndarray
    normalized: np.ndarray
    bracket_floor: float
    fd_rel_err: np.ndarray

    @property
    def n_flagged(self) -> int:
        return int(self.flagged.sum())

    @property
    def status(self) -> str:
        if self.n_flagged == 0:
            return "inconclusive"
        return "pass" if bool(np.all(self.normalized[self.flagged] >= self.bracket_floor)) else "fail"

    @property
    def min_normalized(self) -> float:
        return float(self.normalized[self.flagged].min()) if self.n_flagged else float("nan")

    def summary(self) -> dict:
        return {"status": self.status, "flagged": self.n_flagged,
                "min_normalized_bracket": self.min_normalized,
                "bracket_floor": self.bracket_floor,
                "max_fd_rel_err": float(self.fd_rel_err.max()) if self.fd_rel_err.size else 0.0}


def check_h2(wc: WeightConfig, pt: PhasePoint, j: int, char_tol: float = 1e-3,
             bracket_floor: float = 1e-2, fd_step: float = 1e-5) -> H2Report:
    """Flag near-characteristic samples and test bracket >= floor * <xi, mu>^2 there.

    A sample is near-characteristic when |Re p_j| <= char_tol <xi, mu>^2 and
    |Im p_j| / 2mu <= char_tol <xi, mu>.  ``fd_rel_err`` compares the analytic
    bracket with finite differences, relative to the sum of the magnitudes of
    its two terms.
    """
    f, g = re_im_parts(wc, pt, j)
    lam_sq = pt.lam_sq
    flagged = (np.abs(f) <= char_tol * lam_sq) & (np.abs(g) <= char_tol * np.sqrt(lam_sq))
    br = poisson_bracket(wc, pt, j)
    br_fd = poisson_bracket_fd(wc, pt, j, step=fd_step)
    t_beta, t_curv = bracket_terms(wc, pt, j)
    we = eval_weights(wc, pt.x_prime, pt.x_n)
    scale = 2 * wc.beta * we.phi[j - 1] * (wc.beta * t_beta + 2 * t_curv)
    fd_err = np.abs(br - br_fd) / scale
    return H2Report(flagged, br, br / lam_sq, bracket_floor, fd_err)


def h2_threshold(delta: float, alpha: float, x_prime, x_n, mu, j: int,
                 bracket_floor: float = 1e-2, beta_lo: float = 1e-3, beta_hi: float = 50.0,
                 scan: int = 200, iters: int = 60) -> float:
    """Smallest beta at which check_h2 passes on exact characteristic points
    over the given x samples.

    The passing set need not be a half-line: for j = 2 the -mu^2 term wins
    again once phi_2 = exp(-beta s_2) becomes tiny where s_2 > 0.  A geometric
    scan locates the first passing beta, then bisection refines it against
    the last failing one.  Returns nan when no scanned beta passes.
    """
    xp, xn, mu = np.broadcast_arrays(np.asarray(x_prime, float), np.asarray(x_n, float),
                                     np.asarray(mu, float))
    xp2, xn2, mu2 = (np.concatenate([a, a]) for a in (xp, xn, mu))
    orient = np.concatenate([np.ones(xp.size), -np.ones(xp.size)])

    def ok(beta):
        wc = WeightConfig.from_beta(delta, alpha, beta)
        pt = characteristic_samples(wc, xp2, xn2, mu2, j, orientation=orient)
        return check_h2(wc, pt, j, bracket_floor=bracket_floor).status == "pass"

    grid = np.geomspace(beta_lo, beta_hi, scan)
    first = next((k for k, b in enumerate(grid) if ok(b)), None)
    if first is None:
        return float("nan")
    if first == 0:
        return float(grid[0])
    lo, hi = grid[first - 1], grid[first]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-10 * hi:
            break
    return float(hi)

"""Carleman weights phi_1, phi_2 on the half-plane {x_n > 0} and the interface checks.

Coordinates are x = (x', x_n) with the interface at x_n = 0 and the heat side
reflected onto x_n > 0.  With x0 = (0, -delta) and
psi(x) = |x - x0|^2 - delta^2,

    phi_1(x) = exp(-beta * psi(x', -x_n))
    phi_2(x) = exp(-beta * (psi(x) - alpha * x_n)),   delta/2 < alpha < 2 delta.

Writing phi_j = exp(-beta * s_j) with the quadratic phases

    s_1 = x'^2 + (delta - x_n)^2 - delta^2
    s_2 = x'^2 + (x_n + delta)^2 - delta^2 - alpha x_n

every derivative is exact: grad phi = -beta phi grad s and
phi'' = beta phi (beta grad s grad s^T - 2 I).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class WeightConfig:
    delta: float = 1.0
    alpha: float = 1.0
    M: float = 5.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigError("delta", f"must be positive, got {self.delta!r}")
        if not (self.delta / 2 < self.alpha < 2 * self.delta):
            raise ConfigError("alpha", f"must satisfy delta/2 < alpha < 2 delta, got {self.alpha!r}")
        if not self.M > 0:
            raise ConfigError("M", f"must be positive, got {self.M!r}")

    @classmethod
    def from_beta(cls, delta, alpha, beta):
        return cls(delta=delta, alpha=alpha, M=beta * delta)

    @property
    def beta(self) -> float:
        return self.M / self.delta

    @property
    def x0(self) -> tuple:
        return (0.0, -self.delta)


def psi(wc: WeightConfig, xp, xn):
    """|x - x0|^2 - delta^2."""
    xp, xn = np.asarray(xp, float), np.asarray(xn, float)
    return xp**2 + (xn + wc.delta) ** 2 - wc.delta**2


def phase(wc: WeightConfig, j: int, xp, xn):
    """s_j with phi_j = exp(-beta s_j), and its gradient (d/dx', d/dx_n)."""
    xp, xn = np.broadcast_arrays(np.asarray(xp, float), np.asarray(xn, float))
    d = wc.delta
    if j == 1:
        s = xp**2 + (d - xn) ** 2 - d**2
        gn = -2.0 * (d - xn)
    elif j == 2:
        s = xp**2 + (xn + d) ** 2 - d**2 - wc.alpha * xn
        gn = 2.0 * (xn + d) - wc.alpha
    else:
        raise ValueError(f"j must be 1 or 2, got {j!r}")
    return s, 2.0 * xp, gn


@dataclass
class WeightEval:
    """phi_j and its derivatives; index 0 holds j = 1, index 1 holds j = 2."""

    phi: np.ndarray
    d_xp: np.ndarray
    d_xn: np.ndarray
    d_xpxp: np.ndarray
    d_xpxn: np.ndarray
    d_xnxn: np.ndarray
    phase: np.ndarray
    phase_xp: np.ndarray
    phase_xn: np.ndarray

    def grad(self, j):
        return self.d_xp[j - 1], self.d_xn[j - 1]

    def hess(self, j):
        k = j - 1
        return self.d_xpxp[k], self.d_xpxn[k], self.d_xnxn[k]


def eval_weights(wc: WeightConfig, xp, xn) -> WeightEval:
    beta = wc.beta
    out = {k: [] for k in ("phi", "d_xp", "d_xn", "d_xpxp", "d_xpxn", "d_xnxn",
                           "phase", "phase_xp", "phase_xn")}
    for j in (1, 2):
        s, sp_, sn = phase(wc, j, xp, xn)
        phi = np.exp(-beta * s)
        out["phi"].append(phi)
        out["d_xp"].append(-beta * phi * sp_)
        out["d_xn"].append(-beta * phi * sn)
        out["d_xpxp"].append(beta * phi * (beta * sp_ * sp_ - 2.0))
        out["d_xpxn"].append(beta * phi * (beta * sp_ * sn))
        out["d_xnxn"].append(beta * phi * (beta * sn * sn - 2.0))
        out["phase"].append(s)
        out["phase_xp"].append(sp_)
        out["phase_xn"].append(sn)
    return WeightEval(**{k: np.stack(v) for k, v in out.items()})


def h1_gap_closed_form(wc: WeightConfig, xp):
    """beta^2 alpha (4 delta - alpha) exp(-2 beta psi) on {x_n = 0}."""
    b, a, d = wc.beta, wc.alpha, wc.delta
    return b**2 * a * (4 * d - a) * np.exp(-2 * b * psi(wc, xp, 0.0))


@dataclass
class H1Report:
    x_prime: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    dphi1_dn: np.ndarray
    dphi2_dn: np.ndarray
    gap: np.ndarray
    gap_closed_form: np.ndarray
    equal_ok: np.ndarray
    positive_ok: np.ndarray
    gap_ok: np.ndarray
    closed_form_rel_err: np.ndarray
    fd_rel_err: np.ndarray
    fd_tol: float

    @property
    def conditions_ok(self) -> np.ndarray:
        return self.equal_ok & self.positive_ok & self.gap_ok

    @property
    def consistent(self) -> bool:
        """Analytic derivatives agree with finite differences and the closed form."""
        return bool(self.fd_rel_err.max() <= self.fd_tol
                    and self.closed_form_rel_err.max() <= self.fd_tol)

    @property
    def passed(self) -> bool:
        return bool(self.conditions_ok.all()) and self.consistent

    def summary(self) -> dict:
        return {
            "samples": int(self.x_prime.size),
            "equal_ok": bool(self.equal_ok.all()),
            "positive_ok": bool(self.positive_ok.all()),
            "gap_ok": bool(self.gap_ok.all()),
            "min_gap": float(self.gap.min()),
            "max_closed_form_rel_err": float(self.closed_form_rel_err.max()),
            "max_fd_rel_err": float(self.fd_rel_err.max()),
            "consistent": self.consistent,
            "passed": self.passed,
        }

    def to_csv(self, path) -> None:
        cols = ["x_prime", "phi1", "phi2", "dphi1_dn", "dphi2_dn", "gap",
                "gap_closed_form", "fd_rel_err"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(cols + ["pass"])
            for i in range(self.x_prime.size):
                wr.writerow([f"{getattr(self, c)[i]:.17g}" for c in cols]
                            + [int(self.conditions_ok[i])])


def check_h1(wc: WeightConfig, x_prime, fd_step: float = 1e-5, fd_tol: float = 1e-6,
             eq_tol: float = 1e-14) -> H1Report:
    """Check phi_1 = phi_2, d_n phi_1 > 0 and (d_n phi_1)^2 - (d_n phi_2)^2 > 1 on x_n = 0.

    Each sample is also cross-checked: the analytic gap against its closed
    form, and the analytic normal derivatives against centred differences of
    phi_j across x_n = 0 (the formulas extend smoothly to x_n < 0).
    """
    xp = np.atleast_1d(np.asarray(x_prime, dtype=float))
    we = eval_weights(wc, xp, 0.0)
    phi1, phi2 = we.phi
    d1, d2 = we.d_xn
    gap = d1**2 - d2**2
    closed = h1_gap_closed_form(wc, xp)
    plus = eval_weights(wc, xp, fd_step).phi
    minus = eval_weights(wc, xp, -fd_step).phi
    fd1, fd2 = (plus - minus) / (2 * fd_step)
    fd_gap = fd1**2 - fd2**2
    fd_err = np.maximum.reduce([np.abs(fd1 - d1) / np.abs(d1),
                                np.abs(fd2 - d2) / np.maximum(np.abs(d2), np.abs(d1)),
                                np.abs(fd_gap - closed) / np.abs(closed)])
    return H1Report(
        x_prime=xp, phi1=phi1, phi2=phi2, dphi1_dn=d1, dphi2_dn=d2, gap=gap,
        gap_closed_form=closed,
        equal_ok=np.abs(phi1 - phi2) <= eq_tol * np.abs(phi1),
        positive_ok=d1 > 0,
        gap_ok=gap > 1,
        closed_form_rel_err=np.abs(gap - closed) / np.abs(closed),
        fd_rel_err=fd_err,
        fd_tol=fd_tol,
    )

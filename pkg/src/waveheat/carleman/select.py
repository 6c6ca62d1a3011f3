"""Choice of beta = M / delta satisfying the interface and bracket checks on a compact set."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericalError
from .bracket import characteristic_samples, check_h2, h2_threshold
from .weights import WeightConfig, check_h1


@dataclass
class CompactSet:
    """Rectangle K = [x'_lo, x'_hi] x [x_n_lo, x_n_hi] and a mu range, sampled on a grid."""

    x_prime: tuple = (-0.25, 0.25)
    x_n: tuple = (0.0, 0.25)
    mu: tuple = (1.0, 50.0)
    n: int = 9

    def points(self):
        xp, xn, mu = np.meshgrid(np.linspace(*self.x_prime, self.n),
                                 np.linspace(*self.x_n, self.n),
                                 np.geomspace(*self.mu, self.n), indexing="ij")
        return xp.ravel(), xn.ravel(), mu.ravel()

    def interface(self, count: int = 1000):
        return np.linspace(*self.x_prime, count)


@dataclass
class BetaChoice:
    weight: WeightConfig
    thresholds: dict
    h1: dict
    h2: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"beta": self.weight.beta, "M": self.weight.M, "delta": self.weight.delta,
                "alpha": self.weight.alpha,
                "h2_threshold_j1": self.thresholds[1], "h2_threshold_j2": self.thresholds[2],
                "h1": self.h1, "h2": self.h2}


def h2_on_compact(wc: WeightConfig, K: CompactSet, bracket_floor: float = 1e-2,
                  char_tol: float = 1e-3) -> dict:
    xp, xn, mu = K.points()
    out = {}
    for j in (1, 2):
        orient = np.concatenate([np.ones(xp.size), -np.ones(xp.size)])
        pt = characteristic_samples(wc, np.tile(xp, 2), np.tile(xn, 2), np.tile(mu, 2), j,
                                    orientation=orient)
        out[f"j{j}"] = check_h2(wc, pt, j, char_tol=char_tol, bracket_floor=bracket_floor).summary()
    return out


def choose_weight(delta: float = 1.0, alpha: float = 1.0, K: CompactSet | None = None,
                  interface_samples: int = 1000, bracket_floor: float = 1e-2,
                  margin: float = 1.1, max_tries: int = 40) -> BetaChoice:
    """beta = margin * (empirical h2 threshold), stepped up until the interface and bracket checks both pass."""
    K = K or CompactSet()
    xp, xn, mu = K.points()
    thr = {j: h2_threshold(delta, alpha, xp, xn, mu, j, bracket_floor=bracket_floor)
           for j in (1, 2)}
    if np.isnan(thr[1]) or np.isnan(thr[2]):
        raise NumericalError("choose_weight", f"no beta satisfies the bracket check on K: thresholds {thr}")
    beta = margin * max(thr.values())
    xi = K.interface(interface_samples)
    for _ in range(max_tries):
        wc = WeightConfig.from_beta(delta, alpha, beta)
        h1 = check_h1(wc, xi)
        h2 = h2_on_compact(wc, K, bracket_floor)
        if h1.passed and all(r["status"] == "pass" for r in h2.values()):
            return BetaChoice(wc, thr, h1.summary(), h2)
        beta *= 1.05
    raise NumericalError("choose_weight", "no admissible beta found")

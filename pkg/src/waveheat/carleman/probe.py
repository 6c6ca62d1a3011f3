"""Numerical probe of the weighted Carleman inequality on a rectangular patch.

For h = (h_1, h_2) on {0 <= x_n <= b}, periodic in x' on [-a, a), the probe
evaluates

    LHS = mu * sum_j ||e^{mu phi_j} h_j||_{H^1}^2
    RHS = sum_j ||e^{mu phi_j} P_j h_j||^2
          + |e^{mu phi} (h_1 - i mu h_2)|_{x_n=0}|_{1/2}^2
          + mu |e^{mu phi} (d_n h_1 + d_n h_2 + i mu (d_n phi_1 h_1 + d_n phi_2 h_2))|_{x_n=0}|^2

with P_1 = -Laplace - mu and P_2 = -Laplace - mu^2.  The half-order boundary
norm uses the Fourier multiplier <xi', mu> on the interface line.  Both sides
are quadratic in the weight, so every weight is rescaled by exp(-mu max phi)
to avoid overflow without changing the ratio.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from ..errors import ConfigError, NumericalError
from .weights import WeightConfig, eval_weights


@dataclass(frozen=True)
class Grid2D:
    """Tensor grid: x' periodic on [-a, a) with nx points, x_n in [0, b] with ny points."""

    a: float = 0.25
    b: float = 0.25
    nx: int = 128
    ny: int = 129

    def __post_init__(self):
        for name in ("a", "b"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, f"must be positive, got {getattr(self, name)!r}")
        if self.nx < 8:
            raise ConfigError("nx", f"must be >= 8, got {self.nx!r}")
        if self.ny < 8:
            raise ConfigError("ny", f"must be >= 8, got {self.ny!r}")

    @property
    def x_prime(self):
        return np.linspace(-self.a, self.a, self.nx, endpoint=False)

    @property
    def x_n(self):
        return np.linspace(0.0, self.b, self.ny)

    @property
    def dx(self):
        return 2 * self.a / self.nx

    @property
    def wavenumbers(self):
        return 2 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    def mesh(self):
        return np.meshgrid(self.x_prime, self.x_n, indexing="ij")


@dataclass(frozen=True)
class Bump:
    """C-infinity bump amp * exp(1 - 1/(1 - rho^2)), rho = |x - center| / radius."""

    center: tuple
    radius: float
    amplitude: complex = 1.0

    def __call__(self, xp, xn):
        rho2 = ((xp - self.center[0]) ** 2 + (xn - self.center[1]) ** 2) / self.radius**2
        out = np.zeros(np.shape(rho2), dtype=complex)
        inside = rho2 < 1
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - rho2[inside]))
        return out


def bump_field(grid: Grid2D, bumps1, bumps2):
    """(h_1, h_2) sampled on the grid as sums of bumps."""
    xp, xn = grid.mesh()
    h1 = sum((b(xp, xn) for b in bumps1), np.zeros(xp.shape, complex))
    h2 = sum((b(xp, xn) for b in bumps2), np.zeros(xp.shape, complex))
    return h1, h2


def random_bumps(rng: np.random.Generator, grid: Grid2D, count: int):
    """``count`` random pairs (bump for h_1, bump for h_2).

    Centres lie in the lower half of the patch so the supports may meet
    x_n = 0 (where the boundary operators act) but stay clear of the
    periodic x' edges and the far edge x_n = b.
    """
    out = []
    for _ in range(count):
        pair = []
        for _j in range(2):
            r = rng.uniform(0.2, 0.4) * min(grid.a, grid.b)
            c = (rng.uniform(-grid.a + 1.2 * r, grid.a - 1.2 * r),
                 rng.uniform(0.0, min(0.5 * grid.b, grid.b - 1.2 * r)))
            amp = complex(rng.standard_normal(), rng.standard_normal())
            pair.append(Bump(c, r, amp))
        out.append(tuple(pair))
    return out


@dataclass(frozen=True)
class ProbeResult:
    mu: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.lhs == 0:
            return float("nan")
        return self.rhs / self.lhs


def _dxp(f, k):
    return np.fft.ifft(1j * k[:, None] * np.fft.fft(f, axis=0), axis=0)


def _dxpxp(f, k):
    return np.fft.ifft(-(k[:, None] ** 2) * np.fft.fft(f, axis=0), axis=0)


# fourth-order differences along x_n (axis 1), one-sided at the two ends
_D1_EDGE = (np.array([-25, 48, -36, 16, -3]) / 12, np.array([-3, -10, 18, -6, 1]) / 12)
_D2_EDGE = (np.array([45, -154, 214, -156, 61, -10]) / 12, np.array([10, -15, -4, 14, -6, 1]) / 12)


def _dxn(f, h):
    out = np.empty_like(f)
    out[:, 2:-2] = (f[:, :-4] - 8 * f[:, 1:-3] + 8 * f[:, 3:-1] - f[:, 4:]) / 12
    for k, c in enumerate(_D1_EDGE):
        out[:, k] = f[:, :5] @ c
        out[:, -1 - k] = -(f[:, ::-1][:, :5] @ c)
    return out / h


def _dxnxn(f, h):
    out = np.empty_like(f)
    out[:, 2:-2] = (-f[:, :-4] + 16 * f[:, 1:-3] - 30 * f[:, 2:-2] + 16 * f[:, 3:-1] - f[:, 4:]) / 12
    for k, c in enumerate(_D2_EDGE):
        out[:, k] = f[:, :6] @ c
        out[:, -1 - k] = f[:, ::-1][:, :6] @ c
    return out / h**2


def _check_support(h, name, rel=1e-12):
    scale = np.abs(h).max()
    if scale == 0:
        return
    edges = max(np.abs(h[0, :]).max(), np.abs(h[-1, :]).max(), np.abs(h[:, -1]).max())
    if edges > rel * scale:
        raise NumericalError("carleman_probe",
                             f"{name} is not compactly supported in the patch "
                             f"(edge/max = {edges / scale:.3g})")


def carleman_probe(grid: Grid2D, wc: WeightConfig, h, mu: float) -> ProbeResult:
    """Evaluate both sides of the weighted inequality for h = (h_1, h_2) at ``mu``.

    ``h`` is a pair of complex arrays of shape (nx, ny).  ``ratio`` of the
    result is RHS / LHS, or nan when h = 0.
    """
    if not mu > 0:
        raise ConfigError("mu", f"must be positive, got {mu!r}")
    h1, h2 = (np.asarray(a, dtype=complex) for a in h)
    shape = (grid.nx, grid.ny)
    if h1.shape != shape or h2.shape != shape:
        raise ConfigError("h", f"expected arrays of shape {shape}")
    _check_support(h1, "h_1")
    _check_support(h2, "h_2")

    xp, xn = grid.mesh()
    k = grid.wavenumbers
    dn = xn[0, 1] - xn[0, 0]
    we = eval_weights(wc, xp, xn)
    shift = mu * we.phi.max()
    weights = np.exp(mu * we.phi - shift)

    lhs = rhs = 0.0
    for j, hj in ((1, h1), (2, h2)):
        e = weights[j - 1]
        hp = _dxp(hj, k)
        hn = _dxn(hj, dn)
        lap = _dxpxp(hj, k) + _dxnxn(hj, dn)
        gp, gn = we.grad(j)
        # d(e h) = e (d h + mu h d phi)
        w = e * hj
        wp = e * (hp + mu * hj * gp)
        wn = e * (hn + mu * hj * gn)
        density = np.abs(w) ** 2 + np.abs(wp) ** 2 + np.abs(wn) ** 2
        lhs += mu * grid.dx * trapezoid(density.sum(axis=0), dx=dn)
        shift_j = mu if j == 1 else mu**2
        ph = e * (-lap - shift_j * hj)
        rhs += grid.dx * trapezoid((np.abs(ph) ** 2).sum(axis=0), dx=dn)
        if j == 1:
            h1n = hn[:, 0]
        else:
            h2n = hn[:, 0]

    eb = weights[0][:, 0]
    g1n, g2n = we.d_xn[0][:, 0], we.d_xn[1][:, 0]
    b1 = eb * (h1[:, 0] - 1j * mu * h2[:, 0])
    b2 = eb * (h1n + h2n + 1j * mu * (g1n * h1[:, 0] + g2n * h2[:, 0]))
    lam = np.sqrt(k**2 + mu**2)
    rhs += grid.dx / grid.nx * float(np.sum(lam * np.abs(np.fft.fft(b1)) ** 2))
    rhs += mu * grid.dx * float(np.sum(np.abs(b2) ** 2))
    return ProbeResult(float(mu), float(lhs), float(rhs))


@dataclass
class ProbeSweep:
    """Ratios for a family of bumps over a mu grid; rows ordered (bump, mu)."""

    mu: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def ratio(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.lhs > 0, self.rhs / self.lhs, np.nan)

    @property
    def min_ratio(self) -> float:
        return float(np.nanmin(self.ratio))

    def to_csv(self, path) -> None:
        """Columns bump, mu, lhs, rhs, ratio (bump is 0 for a single-bump sweep)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["bump", "mu", "lhs", "rhs", "ratio"])
            r = self.ratio
            for b in range(self.lhs.shape[0]):
                for m in range(self.mu.size):
                    wr.writerow([b] + [f"{v:.17g}" for v in
                                       (self.mu[m], self.lhs[b, m], self.rhs[b, m], r[b, m])])


def probe_sweep(grid: Grid2D, wc: WeightConfig, fields, mu_values) -> ProbeSweep:
    """carleman_probe for every field in ``fields`` and every mu."""
    mu_values = np.asarray(mu_values, dtype=float)
    lhs = np.empty((len(fields), mu_values.size))
    rhs = np.empty_like(lhs)
    for b, h in enumerate(fields):
        for m, mu in enumerate(mu_values):
            res = carleman_probe(grid, wc, h, mu)
            lhs[b, m], rhs[b, m] = res.lhs, res.rhs
    return ProbeSweep(mu_values, lhs, rhs)

"""Time integration of dU/dt = A U, energy traces and decay-law fits."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError
from .generator import Generator, SystemState, energy, heat_dissipation

SCHEMES = ("implicit-euler", "crank-nicolson")


class Stepper:
    """Factorised one-step map for a fixed generator, time step and scheme.

    Implicit Euler solves (I - dt A) U1 = U0; Crank-Nicolson solves
    (I - dt/2 A) U1 = (I + dt/2 A) U0.  Both use a sparse direct LU.
    """

    def __init__(self, g: Generator, dt: float, scheme: str = "implicit-euler"):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt!r}")
        self.g, self.dt, self.scheme = g, float(dt), scheme
        eye = sp.identity(g.dimension, format="csc")
        theta = 1.0 if scheme == "implicit-euler" else 0.5
        lhs = (eye - theta * self.dt * g.matrix).tocsc()
        self._rhs = None if scheme == "implicit-euler" else (eye + 0.5 * self.dt * g.matrix).tocsr()
        try:
            self._lu = spla.splu(lhs)
        except RuntimeError as exc:  # exactly singular factor
            raise NumericalError("step", f"singular system for dt={dt!r}: {exc}") from exc

    def __call__(self, x: np.ndarray) -> np.ndarray:
        b = x if self._rhs is None else self._rhs @ x
        if np.iscomplexobj(b):
            return self._lu.solve(b.real) + 1j * self._lu.solve(b.imag)
        return self._lu.solve(b)

    def dissipation(self, x_old: np.ndarray, x_new: np.ndarray) -> float:
        """Heat dissipation ||u'||^2 at the point the scheme's balance uses."""
        if self.scheme == "implicit-euler":
            return heat_dissipation(self.g, x_new)
        return heat_dissipation(self.g, 0.5 * (x_old + x_new))


def step(g: Generator, s: SystemState, dt: float, scheme: str = "implicit-euler") -> SystemState:
    """One time step from ``s``."""
    if s.layout != g.layout:
        raise ValueError("state and generator layouts differ")
    return SystemState(g.layout, Stepper(g, dt, scheme)(s.data))


@dataclass
class EnergyTrace:
    times: np.ndarray
    energies: np.ndarray
    dissipation_cum: np.ndarray
    balance_residual: np.ndarray
    scheme: str = ""
    final_state: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.times)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "E", "dissipation_cum", "balance_residual"])
            for row in zip(self.times, self.energies, self.dissipation_cum, self.balance_residual):
                wr.writerow([f"{v:.17g}" for v in row])


def simulate(g: Generator, s0: SystemState, t_end: float, dt: float,
             scheme: str = "implicit-euler", stride: int = 1) -> EnergyTrace:
    """Integrate to ``t_end`` and record the energy every ``stride`` steps.

    ``balance_residual`` is E(t_k) - E(0) + sum_i dt * ||u'||^2, with the
    dissipation sampled where the scheme's own energy identity places it
    (new state for implicit Euler, midpoint for Crank-Nicolson).  It is at
    round-off for CN and equals minus the numerical dissipation for IE.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    stepper = Stepper(g, dt, scheme)
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end / dt yields no steps")
    x = np.array(s0.data, copy=True)
    e0 = energy(g, x)
    times, energies, diss, resid = [0.0], [e0], [0.0], [0.0]
    cum = 0.0
    for k in range(1, n_steps + 1):
        x_new = stepper(x)
        cum += stepper.dt * stepper.dissipation(x, x_new)
        x = x_new
        if k % stride == 0 or k == n_steps:
            e = energy(g, x)
            times.append(k * stepper.dt)
            energies.append(e)
            diss.append(cum)
            resid.append(e - e0 + cum)
    return EnergyTrace(np.array(times), np.array(energies), np.array(diss), np.array(resid),
                       scheme=scheme, final_state=x)


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of sqrt(E) in log coordinates.

    ``logarithmic``: sqrt(E) ~ C / log(t + 2).
    ``polynomial``:  sqrt(E) ~ C (1 + t)^(-p).
    ``residual`` is the root-mean-square misfit of log sqrt(E).
    """

    model: str
    C: float
    p: float | None
    residual: float
    n_samples: int

    def as_dict(self):
        return {"model": self.model, "C": self.C, "p": self.p,
                "residual": self.residual, "n_samples": self.n_samples}


def fit_decay(trace: EnergyTrace, model: str = "logarithmic") -> DecayFit:
    t = np.asarray(trace.times, dtype=float)
    e = np.asarray(trace.energies, dtype=float)
    keep = e > 0
    if keep.sum() < 10:
        raise ValueError(f"need at least 10 samples with E > 0, have {int(keep.sum())}")
    t, y = t[keep], 0.5 * np.log(e[keep])
    if model == "logarithmic":
        # y = log C - log log(t + 2): one free parameter
        r = y + np.log(np.log(t + 2.0))
        logc = r.mean()
        misfit = r - logc
        return DecayFit(model, float(np.exp(logc)), None,
                        float(np.sqrt(np.mean(misfit**2))), int(t.size))
    if model == "polynomial":
        a = np.column_stack([np.ones_like(t), -np.log1p(t)])
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        misfit = y - a @ coef
        return DecayFit(model, float(np.exp(coef[0])), float(coef[1]),
                        float(np.sqrt(np.mean(misfit**2))), int(t.size))
    raise ValueError(f"unknown decay model {model!r}")


# initial data ---------------------------------------------------------------

def bump_state(g: Generator, center: float | None = None, width: float | None = None,
               amplitude: float = 1.0) -> SystemState:
    """Smooth compactly supported bump in v with u = w = 0."""
    grid = g.grid
    gamma, length = grid.config.gamma, grid.config.length
    if center is None:
        center = 0.5 * (gamma + length)
    if width is None:
        width = 0.25 * (length - gamma)
    xw = grid.wave_nodes
    r = (xw - center) / width
    v = np.zeros_like(xw)
    inside = np.abs(r) < 1
    v[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    v[-1] = 0.0
    if not g.coupled:
        v[0] = 0.0
    zeros_u = np.zeros(grid.n1 + 1)
    zeros_w = np.zeros(grid.n2 + 1)
    return SystemState.from_fields(g.layout, zeros_u, v, zeros_w)


def random_state(g: Generator, rng: np.random.Generator) -> SystemState:
    """Standard normal coefficients; constraints hold by construction."""
    return SystemState(g.layout, rng.standard_normal(g.dimension))


def heat_mode_state(g: Generator, k: int = 1) -> SystemState:
    """sin(k pi x / gamma) in u, zero wave fields."""
    grid = g.grid
    xh = grid.heat_nodes
    u = np.sin(k * np.pi * xh / grid.config.gamma)
    u[0] = u[-1] = 0.0
    return SystemState.from_fields(g.layout, u, np.zeros(grid.n2 + 1), np.zeros(grid.n2 + 1))

"""Spectrum and resolvent norms of the discrete generator in the energy norm.

All norms are taken in the discrete H norm.  With the Cholesky factor R of
the H weight matrix (H = R^T R), the map x -> R x is an isometry from
(C^d, H) onto Euclidean C^d, so the H operator norm of any matrix M equals
the spectral norm of R M R^{-1}.  That conjugated matrix is what gets handed
to LAPACK and ARPACK below.
"""
from __future__ import annotations

import csv
import json
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError, SpectralHitError
from .generator import Generator, SystemState

DENSE_LIMIT = 3000

_conj_cache: "weakref.WeakKeyDictionary[Generator, tuple]" = weakref.WeakKeyDictionary()


def _check_dense(g: Generator, dense_limit: int, op: str):
    if g.dimension > dense_limit:
        raise NumericalError(op, f"dimension {g.dimension} exceeds dense limit {dense_limit}")


def h_factor(g: Generator) -> np.ndarray:
    """Upper-triangular R with H = R^T R."""
    return _conjugated(g)[0]


def conjugated_matrix(g: Generator) -> np.ndarray:
    """R A R^{-1}: the generator in H-orthonormal coordinates."""
    return _conjugated(g)[1]


def _conjugated(g: Generator):
    hit = _conj_cache.get(g)
    if hit is None:
        r = sla.cholesky(g.gram.toarray(), lower=False)
        ra = (g.matrix.T @ r.T).T  # R A, dense
        b = sla.solve_triangular(r, ra.T, trans="T", lower=False).T
        hit = (r, b)
        _conj_cache[g] = hit
    return hit


# spectrum -------------------------------------------------------------------

@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    tol: float

    @property
    def max_real(self) -> float:
        return float(self.eigenvalues.real.max())

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())

    @property
    def residuals_ok(self) -> bool:
        return bool(self.max_residual <= self.tol)

    @property
    def dissipative(self) -> bool:
        return bool(self.max_real <= self.tol)

    def conjugate_pairing_error(self) -> float:
        """Max distance from each eigenvalue's conjugate to the spectrum."""
        lam = self.eigenvalues
        d = np.abs(lam.conj()[:, None] - lam[None, :]).min(axis=1)
        return float(d.max())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["re", "im", "residual"])
            for lam, res in zip(self.eigenvalues, self.residuals):
                wr.writerow([f"{lam.real:.17g}", f"{lam.imag:.17g}", f"{res:.17g}"])


def _sort_spectrum(lam):
    # least damped first, then by imaginary part
    return np.lexsort((lam.imag, -lam.real))


def eigenvalues(g: Generator, tol: float = 1e-8, dense_limit: int = DENSE_LIMIT,
                block: slice | None = None, refine: bool = True) -> SpectrumReport:
    """All eigenvalues with H-norm eigenpair residuals ||A x - lam x||_H / ||x||_H.

    Dense QR on the conjugated matrix gives every eigenpair at a backward
    error of roughly eps * ||A||, which at fine grids (||A|| ~ 4 / h1^2)
    sits near 1e-8.  With ``refine`` each pair then gets one inverse
    iteration step on the sparse matrix plus a Rayleigh quotient update in
    the H inner product, and the residual is measured with the sparse H root.

    ``block`` restricts to a diagonal block of the conjugated matrix, which is
    meaningful for the decoupled generator only (its blocks are invariant).
    """
    _check_dense(g, dense_limit, "eigenvalues")
    r, b = _conjugated(g)
    if block is not None:
        b = b[block, block]
    try:
        lam, y = sla.eig(b)
    except sla.LinAlgError as exc:
        raise NumericalError("eigenvalues", str(exc)) from exc
    if block is not None:
        residuals = np.linalg.norm(b @ y - y * lam[None, :], axis=0) / np.linalg.norm(y, axis=0)
        order = _sort_spectrum(lam)
        return SpectrumReport(lam[order], residuals[order], tol)

    x = sla.solve_triangular(r, y, lower=False)
    a = g.matrix.tocsc()
    q = g.h_root
    eye = sp.identity(g.dimension, format="csc")
    residuals = np.empty(lam.size)
    for k in range(lam.size):
        lk, xk = lam[k], x[:, k]
        if lk.imag == 0.0:
            lk, xk = lk.real, xk.real
        if refine:
            try:
                z = spla.splu((a - (lk * (1 + 1e-13)) * eye).tocsc()).solve(xk)
                if np.all(np.isfinite(z)):
                    xk = z
            except RuntimeError:
                pass
        qx = q @ xk
        xk = xk / np.linalg.norm(qx)
        axk = a @ xk
        if refine:
            lk = np.vdot(q @ xk, q @ axk)
            if np.isrealobj(xk):
                lk = complex(lk.real, 0.0)
        lam[k] = lk
        residuals[k] = np.linalg.norm(q @ (axk - lk * xk))
    order = _sort_spectrum(lam)
    return SpectrumReport(lam[order], residuals[order], tol)


def spectral_distance(spectrum, mu: float) -> float:
    lam = spectrum.eigenvalues if isinstance(spectrum, SpectrumReport) else np.asarray(spectrum)
    return float(np.abs(lam - 1j * mu).min())


# resolvent ------------------------------------------------------------------

def resolvent_apply(g: Generator, mu: float, f, check_tol: float = 1e-6,
                    dense_limit: int = DENSE_LIMIT) -> SystemState:
    """Solve (A - i mu) U = F.

    Written out blockwise this is the stationary transmission problem
    (u'' - i mu u = f0, v'' + mu^2 v = g1 + i mu g0, w = g0 + i mu v) with the
    discrete interface row.  A singular or numerically unreliable solve is
    reported as a SpectralHitError carrying the nearest eigenvalue when the
    dimension allows a dense spectrum.
    """
    fd = f.data if isinstance(f, SystemState) else np.asarray(f)
    if fd.shape != (g.dimension,):
        raise ValueError("right-hand side has the wrong dimension")
    shifted = (g.matrix - 1j * mu * sp.identity(g.dimension)).tocsc()

    def hit():
        nearest = None
        if g.dimension <= dense_limit:
            lam = eigenvalues(g, dense_limit=dense_limit).eigenvalues
            nearest = complex(lam[np.argmin(np.abs(lam - 1j * mu))])
        return SpectralHitError(mu, nearest)

    try:
        x = spla.splu(shifted).solve(fd.astype(complex))
    except RuntimeError:
        raise hit() from None
    if not np.all(np.isfinite(x)):
        raise hit()
    scale = g.norm_sq(fd) ** 0.5 + abs(mu) * g.norm_sq(x) ** 0.5
    if scale > 0 and g.norm_sq(shifted @ x - fd) ** 0.5 > check_tol * scale:
        raise hit()
    return SystemState(g.layout, x)


def shifted_norm(b: np.ndarray, mu: float, method: str = "lanczos", tol: float = 1e-12) -> float:
    """||(B - i mu)^{-1}||_2 for a dense matrix B in orthonormal coordinates."""
    m = np.asarray(b, dtype=complex) - 1j * mu * np.eye(b.shape[0])
    if method == "dense":
        s = sla.svdvals(m)
        smin = s[-1]
        if smin == 0 or not np.isfinite(smin):
            raise SpectralHitError(mu)
        return float(1.0 / smin)
    if method != "lanczos":
        raise ValueError(f"unknown method {method!r}")
    lu, piv = sla.lu_factor(m, check_finite=False)
    if np.min(np.abs(np.diag(lu))) == 0.0:
        raise SpectralHitError(mu)
    n = m.shape[0]
    if n <= 2:
        return shifted_norm(b, mu, method="dense")

    def matvec(y):
        z = sla.lu_solve((lu, piv), y, trans=2, check_finite=False)
        return sla.lu_solve((lu, piv), z, check_finite=False)

    op = spla.LinearOperator((n, n), matvec=matvec, dtype=complex)
    v0 = np.ones(n, dtype=complex) / np.sqrt(n)
    try:
        val = spla.eigsh(op, k=1, which="LM", tol=tol, v0=v0, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise NumericalError("resolvent_norm", f"ARPACK did not converge at mu={mu!r}") from exc
    lam = float(np.real(val[0]))
    if not np.isfinite(lam) or lam <= 0:
        raise SpectralHitError(mu)
    return float(np.sqrt(lam))


def resolvent_norm(g, mu: float, method: str = "lanczos",
                   dense_limit: int = DENSE_LIMIT) -> float:
    """H operator norm of (A - i mu)^{-1}.

    ``g`` may also be a plain square array, taken to be already expressed in
    H-orthonormal coordinates (used for injected test matrices).
    """
    if isinstance(g, Generator):
        _check_dense(g, dense_limit, "resolvent_norm")
        b = conjugated_matrix(g)
    else:
        b = np.asarray(g)
    return shifted_norm(b, mu, method=method)


@dataclass
class ResolventSweep:
    mu: np.ndarray
    norms: np.ndarray
    exp_slope: float
    exp_intercept: float
    poly_exponent: float
    poly_intercept: float
    envelope_slope: float

    @property
    def log_norms(self) -> np.ndarray:
        return np.log(self.norms)

    def fit_summary(self) -> dict:
        return {
            "mu_min": float(self.mu[0]),
            "mu_max": float(self.mu[-1]),
            "count": int(self.mu.size),
            "exponential": {"slope": self.exp_slope, "intercept": self.exp_intercept},
            "polynomial": {"exponent": self.poly_exponent, "intercept": self.poly_intercept},
            "envelope_slope": self.envelope_slope,
            "max_norm": float(self.norms.max()),
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["mu", "norm", "log_norm"])
            for m, n, ln in zip(self.mu, self.norms, self.log_norms):
                wr.writerow([f"{m:.17g}", f"{n:.17g}", f"{ln:.17g}"])

    def write_fit_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.fit_summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def resolvent_sweep(g, mu_min: float, mu_max: float, count: int, method: str = "lanczos",
                    workers: int = 1) -> ResolventSweep:
    """Norms at ``count`` geometrically spaced mu in [mu_min, mu_max].

    Fits log||R|| = a + b mu (exponential envelope) and log||R|| = a + k log mu
    (polynomial law).  ``envelope_slope`` is the smallest C with
    log||R(mu)|| <= log||R(mu_min)|| + C (mu - mu_min) on the sweep.
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    if not 0 < mu_min < mu_max:
        raise ValueError("need 0 < mu_min < mu_max for geometric spacing")
    mus = np.geomspace(mu_min, mu_max, count)
    b = conjugated_matrix(g) if isinstance(g, Generator) else np.asarray(g)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            norms = np.array(list(pool.map(lambda m: shifted_norm(b, m, method=method), mus)))
    else:
        norms = np.array([shifted_norm(b, m, method=method) for m in mus])
    logn = np.log(norms)
    exp_slope, exp_icpt = np.polyfit(mus, logn, 1)
    poly_k, poly_icpt = np.polyfit(np.log(mus), logn, 1)
    envelope = float(np.max((logn[1:] - logn[0]) / (mus[1:] - mus[0])))
    return ResolventSweep(mus, norms, float(exp_slope), float(exp_icpt),
                          float(poly_k), float(poly_icpt), envelope)


# H1 control of the heat component ----------------------------------------------

def heat_h1_ratio(u: np.ndarray, length: float, mu: float) -> float:
    """||u||_{H^1} / (||u'|| + ||u'' - i mu u||) on a uniform grid of (0, length).

    No boundary conditions are imposed on ``u``; the ratio should stay
    bounded uniformly in mu >= 1.
    """
    u = np.asarray(u, dtype=complex)
    n = u.size - 1
    h = length / n
    du = np.diff(u) / h
    f = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2 - 1j * mu * u[1:-1]
    wts = np.full(n + 1, h)
    wts[0] = wts[-1] = h / 2
    l2 = np.sum(wts * np.abs(u) ** 2)
    grad = h * np.sum(np.abs(du) ** 2)
    fn = h * np.sum(np.abs(f) ** 2)
    return float(np.sqrt(l2 + grad) / (np.sqrt(grad) + np.sqrt(fn)))

"""Discrete generator of the heat-wave transmission system.

The continuous operator acts on U = (u, v, w) with w = dv/dt as

    A U = (u'', w, v'')

on (0, gamma) x (gamma, L) x (gamma, L), with u(0) = 0, v(L) = w(L) = 0 and
the transmission conditions u(gamma) = w(gamma), u'(gamma) = v'(gamma).

Discretisation
--------------
Central differences in each region.  The stored unknowns are

    coupled:    u_1..u_{n1-1} | c | v_{n1}..v_{N-1} | w_{n1+1}..w_{N-1}
    decoupled:  u_1..u_{n1-1} |     v_{n1+1}..v_{N-1} | w_{n1+1}..w_{N-1}

where ``c`` is the single stored interface value shared by u and w. The row
for ``c`` comes from writing the heat and wave stencils at gamma with ghost
values, matching the centred fluxes and eliminating the ghosts:

    (h1 + h2)/2 * c' = (v_{n1+1} - v_{n1})/h2 - (c - u_{n1-1})/h1

With trapezoid weights on u, w and the forward-difference gradient form on v,
summation by parts gives Re<AU, U>_H = -sum_cells h1 |D u|^2 exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .geometry import Grid


@dataclass(frozen=True)
class StateLayout:
    """Index map from the coefficient vector to node values."""

    n1: int
    n2: int
    coupled: bool

    @property
    def n_u(self) -> int:
        return self.n1 - 1

    @property
    def n_v(self) -> int:
        return self.n2 if self.coupled else self.n2 - 1

    @property
    def n_w(self) -> int:
        return self.n2 - 1

    @property
    def dim(self) -> int:
        return self.n_u + int(self.coupled) + self.n_v + self.n_w

    @property
    def u_slice(self) -> slice:
        return slice(0, self.n_u)

    @property
    def c_index(self) -> int | None:
        return self.n_u if self.coupled else None

    @property
    def v_slice(self) -> slice:
        start = self.n_u + int(self.coupled)
        return slice(start, start + self.n_v)

    @property
    def w_slice(self) -> slice:
        start = self.v_slice.stop
        return slice(start, start + self.n_w)

    # node-value views -----------------------------------------------------

    def u_nodes(self, x: np.ndarray) -> np.ndarray:
        """u on heat nodes 0..n1 (Dirichlet zero at 0, shared value at gamma)."""
        out = np.zeros(self.n1 + 1, dtype=x.dtype)
        out[1:self.n1] = x[self.u_slice]
        if self.coupled:
            out[self.n1] = x[self.c_index]
        return out

    def v_nodes(self, x: np.ndarray) -> np.ndarray:
        """v on wave nodes gamma..L."""
        out = np.zeros(self.n2 + 1, dtype=x.dtype)
        if self.coupled:
            out[:self.n2] = x[self.v_slice]
        else:
            out[1:self.n2] = x[self.v_slice]
        return out

    def w_nodes(self, x: np.ndarray) -> np.ndarray:
        """w on wave nodes gamma..L."""
        out = np.zeros(self.n2 + 1, dtype=x.dtype)
        out[1:self.n2] = x[self.w_slice]
        if self.coupled:
            out[0] = x[self.c_index]
        return out

    def pack(self, u, v, w, atol=0.0) -> np.ndarray:
        """Coefficient vector from node arrays.

        ``u`` lives on the n1+1 heat nodes, ``v`` and ``w`` on the n2+1 wave
        nodes.  Dirichlet entries must vanish and, when coupled, u and w must
        agree at the interface (to ``atol``); otherwise ValueError.
        """
        u, v, w = (np.asarray(a) for a in (u, v, w))
        if u.shape != (self.n1 + 1,) or v.shape != (self.n2 + 1,) or w.shape != (self.n2 + 1,):
            raise ValueError("node arrays have the wrong length")
        dtype = np.result_type(u, v, w, float)
        checks = [("u(0)", u[0]), ("v(L)", v[-1]), ("w(L)", w[-1])]
        if self.coupled:
            checks.append(("u(gamma) - w(gamma)", u[-1] - w[0]))
        else:
            checks += [("u(gamma)", u[-1]), ("v(gamma)", v[0]), ("w(gamma)", w[0])]
        for name, val in checks:
            if abs(val) > atol:
                raise ValueError(f"constraint violated: {name} = {val!r}")
        x = np.zeros(self.dim, dtype=dtype)
        x[self.u_slice] = u[1:self.n1]
        if self.coupled:
            x[self.c_index] = u[-1]
            x[self.v_slice] = v[:self.n2]
        else:
            x[self.v_slice] = v[1:self.n2]
        x[self.w_slice] = w[1:self.n2]
        return x


@dataclass(frozen=True, eq=False)
class SystemState:
    """A state (u, v, w) stored as its coefficient vector."""

    layout: StateLayout
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.layout.dim,):
            raise ValueError(f"state has shape {self.data.shape}, expected ({self.layout.dim},)")

    @classmethod
    def from_fields(cls, layout, u, v, w, atol=0.0):
        return cls(layout, layout.pack(u, v, w, atol=atol))

    @classmethod
    def zeros(cls, layout, dtype=float):
        return cls(layout, np.zeros(layout.dim, dtype=dtype))

    @property
    def u(self):
        return self.layout.u_nodes(self.data)

    @property
    def v(self):
        return self.layout.v_nodes(self.data)

    @property
    def w(self):
        return self.layout.w_nodes(self.data)

    def __mul__(self, c):
        return SystemState(self.layout, c * self.data)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Generator:
    """Assembled discrete generator with its energy-space structure.

    ``matrix`` is the action on coefficient vectors; ``h_root`` is a sparse
    (possibly rectangular) Q with <x, y>_H = (Q x)^H (Q y); ``grad_u`` maps a
    state to sqrt(h1) * (D u) on heat cells so that ||grad_u x||^2 is the
    discrete ||u'||^2 over (0, gamma).
    """

    grid: Grid
    layout: StateLayout
    matrix: sp.csr_matrix
    h_root: sp.csr_matrix
    grad_u: sp.csr_matrix

    @property
    def dimension(self) -> int:
        return self.layout.dim

    @property
    def coupled(self) -> bool:
        return self.layout.coupled

    @cached_property
    def gram(self) -> sp.csr_matrix:
        """H weight matrix Q^T Q."""
        return (self.h_root.T @ self.h_root).tocsr()

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def state(self, data) -> SystemState:
        return SystemState(self.layout, np.asarray(data))

    def inner(self, x, y) -> complex:
        x, y = _data(x), _data(y)
        return np.vdot(self.h_root @ y, self.h_root @ x)

    def norm_sq(self, x) -> float:
        qx = self.h_root @ _data(x)
        return float(np.real(np.vdot(qx, qx)))

    def block_slices(self):
        """Coefficient slices of the u (incl. interface), v and w blocks."""
        lo = self.layout
        u_stop = lo.n_u + int(lo.coupled)
        return slice(0, u_stop), lo.v_slice, lo.w_slice


def _data(s):
    return s.data if isinstance(s, SystemState) else np.asarray(s)


def assemble_generator(grid: Grid, coupling: str = "coupled") -> Generator:
    """Assemble the generator on ``grid``.

    ``coupling="decoupled"`` replaces the transmission conditions by
    homogeneous Dirichlet conditions at gamma on both sides; it exists so the
    heat and wave blocks can be checked against closed-form spectra.
    """
    if coupling not in ("coupled", "decoupled"):
        raise ValueError(f"unknown coupling {coupling!r}")
    coupled = coupling == "coupled"
    n1, n2, h1, h2 = grid.n1, grid.n2, grid.h1, grid.h2
    lo = StateLayout(n1, n2, coupled)

    # global node index -> coefficient index, per field (-1 = Dirichlet zero)
    u_idx = np.full(n1 + 1, -1)
    u_idx[1:n1] = np.arange(lo.n_u)
    v_idx = np.full(n2 + 1, -1)
    w_idx = np.full(n2 + 1, -1)
    w_idx[1:n2] = np.arange(lo.w_slice.start, lo.w_slice.stop)
    if coupled:
        u_idx[n1] = lo.c_index
        w_idx[0] = lo.c_index
        v_idx[:n2] = np.arange(lo.v_slice.start, lo.v_slice.stop)
    else:
        v_idx[1:n2] = np.arange(lo.v_slice.start, lo.v_slice.stop)

    rows, cols, vals = [], [], []

    def put(r, node_idx, coef):
        if node_idx >= 0 and coef != 0.0:
            rows.append(r)
            cols.append(node_idx)
            vals.append(coef)

    for k in range(1, n1):
        r = u_idx[k]
        put(r, u_idx[k - 1], 1.0 / h1**2)
        put(r, u_idx[k], -2.0 / h1**2)
        put(r, u_idx[k + 1], 1.0 / h1**2)
    if coupled:
        r = lo.c_index
        s = 2.0 / (h1 + h2)
        put(r, v_idx[1], s / h2)
        put(r, v_idx[0], -s / h2)
        put(r, lo.c_index, -s / h1)
        put(r, u_idx[n1 - 1], s / h1)
    # v' = w on every stored v node
    for k in range(n2 + 1):
        if v_idx[k] >= 0:
            put(v_idx[k], w_idx[k], 1.0)
    for k in range(1, n2):
        r = w_idx[k]
        put(r, v_idx[k - 1], 1.0 / h2**2)
        put(r, v_idx[k], -2.0 / h2**2)
        put(r, v_idx[k + 1], 1.0 / h2**2)

    dim = lo.dim
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))

    # Q: rows are sqrt-weighted u nodes, v cell gradients, w nodes
    q_rows, q_cols, q_vals = [], [], []
    row = 0
    for k in range(1, n1):
        q_rows.append(row); q_cols.append(u_idx[k]); q_vals.append(np.sqrt(h1)); row += 1
    if coupled:
        q_rows.append(row); q_cols.append(lo.c_index); q_vals.append(np.sqrt(0.5 * (h1 + h2))); row += 1
    for k in range(n2):
        for node, sign in ((k + 1, 1.0), (k, -1.0)):
            if v_idx[node] >= 0:
                q_rows.append(row); q_cols.append(v_idx[node]); q_vals.append(sign / np.sqrt(h2))
        row += 1
    for k in range(1, n2):
        q_rows.append(row); q_cols.append(w_idx[k]); q_vals.append(np.sqrt(h2)); row += 1
    h_root = sp.csr_matrix((q_vals, (q_rows, q_cols)), shape=(row, dim))

    g_rows, g_cols, g_vals = [], [], []
    for k in range(n1):
        for node, sign in ((k + 1, 1.0), (k, -1.0)):
            if u_idx[node] >= 0:
                g_rows.append(k); g_cols.append(u_idx[node]); g_vals.append(sign / np.sqrt(h1))
    grad_u = sp.csr_matrix((g_vals, (g_rows, g_cols)), shape=(n1, dim))

    return Generator(grid=grid, layout=lo, matrix=matrix, h_root=h_root, grad_u=grad_u)


def apply_generator(g: Generator, s: SystemState) -> SystemState:
    if not isinstance(s, SystemState):
        s = SystemState(g.layout, np.asarray(s))
    if s.layout != g.layout:
        raise ValueError(f"state layout {s.layout} does not match generator layout {g.layout}")
    return SystemState(g.layout, g.matrix @ s.data)


def energy(g: Generator, s) -> float:
    """Discrete E = 1/2 (||u||^2 + ||w||^2 + ||v'||^2)."""
    return 0.5 * g.norm_sq(s)


def heat_dissipation(g: Generator, s) -> float:
    """Discrete ||u'||^2 over the heat region."""
    du = g.grad_u @ _data(s)
    return float(np.real(np.vdot(du, du)))


def dissipation_residual(g: Generator, s) -> float:
    """Re<A s, s>_H + ||u'||^2; zero up to round-off for this scheme."""
    x = _data(s)
    return float(np.real(g.inner(g.matrix @ x, x))) + heat_dissipation(g, x)


def graph_norm_sq(g: Generator, s) -> float:
    """Discrete D(A) norm squared, ||U||_H^2 + ||A U||_H^2."""
    x = _data(s)
    return g.norm_sq(x) + g.norm_sq(g.matrix @ x)


def export_coo(g: Generator, path) -> None:
    """Write the matrix as ``row col value`` lines (0-based indices)."""
    coo = g.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {g.dimension} {g.dimension} {coo.nnz}\n")
        for i in order:
            fh.write(f"{coo.row[i]} {coo.col[i]} {coo.data[i]:.17g}\n")

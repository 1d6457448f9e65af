"""Radial meshes, quadrature, norms, dual pairings and the tau/perp splitting.

Everything downstream works with piecewise-linear radial functions on a mesh
of (1, R_max].  Volume integrals carry the full angular factor
omega_N = 2 pi^{N/2} / Gamma(N/2), so discrete quantities are literal
truncations of integrals over the exterior of the unit ball.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Params",
    "RadialGrid",
    "RadialFunction",
    "DualDensity",
    "build_grid",
    "x_norm",
    "dual_pair",
    "pairing_vector",
    "project_perp",
    "residual",
    "omega_N",
]

EPS_REG = 1e-12  # floor for |u'|^{p-2} coefficients in Newton-type steps


def omega_N(N: int) -> float:
    """Surface area of the unit sphere in dimension N."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class Params:
    """Exponent p > 1 and dimension N >= 2, with the derived regime tag."""

    p: float
    N: int

    def __post_init__(self) -> None:
        if not self.p > 1.0:
            raise ValueError(f"need p > 1, got p={self.p}")
        if self.N < 2:
            raise ValueError(f"need N >= 2, got N={self.N}")

    @property
    def regime(self) -> str:
        if self.p < 2.0:
            return "singular"
        if self.p == 2.0:
            return "linear"
        if self.p < self.N:
            return "degenerate"
        return "supercritical"  # p >= N: outside the scope of most operations

    @property
    def omega(self) -> float:
        return omega_N(self.N)

    @property
    def decay_exponent(self) -> float:
        """(N-p)/(p-1): decay rate of the first eigenfunction."""
        return (self.N - self.p) / (self.p - 1.0)

    @property
    def C_Np(self) -> float:
        """((N-p)/(p-1))^{p-1}: the Riccati ceiling."""
        return self.decay_exponent ** (self.p - 1.0)


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing nodes 1 = r_0 < ... < r_M = R_max.

    Carries exact cell moments of r^{N-1} so that integrals of piecewise
    linear functions against r^{N-1} dr are computed without quadrature
    error (the `N` used for the volume factor is baked in at build time).
    """

    nodes: np.ndarray
    grading: str
    N: int
    # derived, filled in __post_init__
    h: np.ndarray = field(repr=False, default=None)
    mid: np.ndarray = field(repr=False, default=None)
    cell_vol: np.ndarray = field(repr=False, default=None)  # int_cell r^{N-1} dr
    mom1: np.ndarray = field(repr=False, default=None)  # int_cell (r-a) r^{N-1} dr
    mom2: np.ndarray = field(repr=False, default=None)  # int_cell (r-a)^2 r^{N-1} dr
    quad_weights: np.ndarray = field(repr=False, default=None)

    def __post_init__(self) -> None:
        r = np.asarray(self.nodes, dtype=float)
        if r.ndim != 1 or r.size < 2:
            raise ValueError("grid needs at least two nodes")
        if abs(r[0] - 1.0) > 1e-14:
            raise ValueError("first node must be exactly 1")
        if np.any(np.diff(r) <= 0):
            raise ValueError("nodes must be strictly increasing")
        N = self.N
        a, b = r[:-1], r[1:]
        I0 = (b**N - a**N) / N
        I1 = (b ** (N + 1) - a ** (N + 1)) / (N + 1)
        I2 = (b ** (N + 2) - a ** (N + 2)) / (N + 2)
        h = b - a
        m1 = I1 - a * I0
        m2 = I2 - 2.0 * a * I1 + a * a * I0
        w = np.zeros_like(r)
        # hat-function weights: exact for piecewise-linear integrands
        w[:-1] += I0 - m1 / h
        w[1:] += m1 / h
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "mid", 0.5 * (a + b))
        object.__setattr__(self, "cell_vol", I0)
        object.__setattr__(self, "mom1", m1)
        object.__setattr__(self, "mom2", m2)
        object.__setattr__(self, "quad_weights", w)

    @property
    def M(self) -> int:
        return self.nodes.size - 1

    @property
    def R_max(self) -> float:
        return float(self.nodes[-1])

    def integrate_nodal(self, values: np.ndarray) -> float:
        """Exact integral of a piecewise-linear nodal function against r^{N-1} dr."""
        return float(self.quad_weights @ np.asarray(values, dtype=float))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("r\n")
        np.savetxt(buf, self.nodes, fmt="%.17g")
        return buf.getvalue()


def build_grid(R_max: float, M: int, grading: str = "geometric", N: int = 3) -> RadialGrid:
    """Mesh of [1, R_max] with M cells; geometric grading puts r_i = R_max^{i/M}."""
    if not R_max > 1.0:
        raise ValueError(f"need R_max > 1, got {R_max}")
    if M < 16:
        raise ValueError(f"need M >= 16, got {M}")
    if grading == "uniform":
        nodes = 1.0 + (R_max - 1.0) * np.arange(M + 1) / M
    elif grading == "geometric":
        nodes = R_max ** (np.arange(M + 1) / M)
    else:
        raise ValueError(f"unknown grading {grading!r}")
    nodes[0] = 1.0
    nodes[-1] = R_max
    return RadialGrid(nodes=nodes, grading=grading, N=N)


@dataclass(frozen=True)
class RadialFunction:
    """Piecewise-linear nodal function on a RadialGrid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ValueError("values must match the grid nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def bc(self) -> str:
        tags = []
        if self.values[0] == 0.0:
            tags.append("dirichlet_inner")
        if self.values[-1] == 0.0:
            tags.append("dirichlet_outer")
        return "+".join(tags) if tags else "free"

    def derivative_cells(self) -> np.ndarray:
        return np.diff(self.values) / self.grid.h

    def __call__(self, r: float | np.ndarray) -> np.ndarray:
        return np.interp(r, self.grid.nodes, self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("r,value\n")
        np.savetxt(buf, np.column_stack([self.grid.nodes, self.values]),
                   fmt="%.17g", delimiter=",")
        return buf.getvalue()


def radial_function_from_csv(grid_or_none, text: str) -> RadialFunction:
    arr = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1)
    nodes, vals = arr[:, 0], arr[:, 1]
    if grid_or_none is None:
        raise ValueError("a grid (with its dimension N) is required to rebuild")
    g = grid_or_none
    if not np.allclose(nodes, g.nodes, rtol=0, atol=1e-12):
        raise ValueError("CSV nodes do not match the grid")
    return RadialFunction(g, vals)


@dataclass(frozen=True)
class DualDensity:
    """Functional <h,u> = omega_N int g u r^{N-1} dr with compactly supported g."""

    g: RadialFunction

    def __post_init__(self) -> None:
        v = self.g.values
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValueError("density must vanish at both endpoints")


def _require_same_grid(a: RadialGrid, b: RadialGrid) -> None:
    if a is b:
        return
    if a.nodes.shape != b.nodes.shape or not np.array_equal(a.nodes, b.nodes):
        raise ValueError("mismatched grids")


def x_norm(u: RadialFunction, params: Params) -> float:
    """(omega_N int |u'|^p r^{N-1} dr)^{1/p} for u with u(1)=0."""
    if u.values[0] != 0.0:
        raise ValueError("x_norm requires the Dirichlet condition u(1)=0")
    du = u.derivative_cells()
    g = u.grid
    return float((params.omega * np.sum(np.abs(du) ** params.p * g.cell_vol))
                 ** (1.0 / params.p))


def x_norm_values(values: np.ndarray, grid: RadialGrid, params: Params) -> float:
    du = np.diff(values) / grid.h
    return float((params.omega * np.sum(np.abs(du) ** params.p * grid.cell_vol))
                 ** (1.0 / params.p))


def dual_pair(h: DualDensity, u: RadialFunction) -> float:
    """omega_N int g u r^{N-1} dr, exact for piecewise-linear g and u."""
    g = h.g
    _require_same_grid(g.grid, u.grid)
    grid = u.grid
    ga = g.values[:-1]
    ua = u.values[:-1]
    dg = np.diff(g.values) / grid.h
    du = np.diff(u.values) / grid.h
    cells = (ga * ua * grid.cell_vol
             + (ga * du + ua * dg) * grid.mom1
             + dg * du * grid.mom2)
    return float(omega_N(grid.N) * np.sum(cells))


def pairing_vector(h: DualDensity, grid: RadialGrid) -> np.ndarray:
    """Nodal vector P with <h,u> = P . u_values for every nodal u."""
    _require_same_grid(h.g.grid, grid)
    ga = h.g.values[:-1]
    dg = np.diff(h.g.values) / grid.h
    P = np.zeros_like(grid.nodes)
    # u = hat at left node: 1 - t/h ; at right node: t/h  (t = r - a)
    left = ga * (grid.cell_vol - grid.mom1 / grid.h) + dg * (grid.mom1 - grid.mom2 / grid.h)
    right = ga * grid.mom1 / grid.h + dg * grid.mom2 / grid.h
    P[:-1] += left
    P[1:] += right
    return omega_N(grid.N) * P


def eigen_weight_vector(phi_values: np.ndarray, K_nodal: np.ndarray,
                        grid: RadialGrid, params: Params) -> np.ndarray:
    """Nodal vector W for the functional u -> omega_N int K phi^{p-1} u r^{N-1} dr.

    K phi^{p-1} is treated as piecewise linear through its nodal values, which
    keeps the projection below exactly idempotent.
    """
    vals = K_nodal * np.abs(phi_values) ** (params.p - 1.0) * np.sign(phi_values)
    vals[0] = 0.0  # phi(1) = 0 anyway
    ga = vals[:-1]
    dg = np.diff(vals) / grid.h
    W = np.zeros_like(grid.nodes)
    left = ga * (grid.cell_vol - grid.mom1 / grid.h) + dg * (grid.mom1 - grid.mom2 / grid.h)
    right = ga * grid.mom1 / grid.h + dg * grid.mom2 / grid.h
    W[:-1] += left
    W[1:] += right
    return params.omega * W


def project_perp(u: RadialFunction, eig, K) -> tuple[float, RadialFunction]:
    """Split u = tau*phi1 + uperp with int K phi1^{p-1} uperp r^{N-1} dr = 0."""
    grid = u.grid
    phi = eig.phi_on(grid)
    params = eig.params
    K_nodal = K.eval(grid.nodes)
    W = eigen_weight_vector(phi.values, K_nodal, grid, params)
    denom = float(W @ phi.values)
    tau = float(W @ u.values) / denom
    uperp = RadialFunction(grid, u.values - tau * phi.values)
    return tau, uperp


def weak_defect(values: np.ndarray, lam: float, K_mid: np.ndarray,
                P: np.ndarray | None, grid: RadialGrid, params: Params) -> np.ndarray:
    """Interior-node defect of the weak form at u (nodal values).

    d_i = omega [ int |u'|^{p-2}u' v_i' r^{N-1} - lam int K |u|^{p-2}u v_i r^{N-1} ]
          - <h, v_i>.
    """
    p, om = params.p, params.omega
    du = np.diff(values) / grid.h
    F = np.sign(du) * np.abs(du) ** (p - 1.0) * grid.cell_vol / grid.h
    ubar = 0.5 * (values[:-1] + values[1:])
    Gm = K_mid * np.sign(ubar) * np.abs(ubar) ** (p - 1.0) * grid.cell_vol
    d = np.zeros_like(values)
    d[1:] += om * F
    d[:-1] -= om * F
    d[1:] -= 0.5 * lam * om * Gm
    d[:-1] -= 0.5 * lam * om * Gm
    if P is not None:
        d = d - P
    return d[1:-1]


def residual(u: RadialFunction, lam: float, K, h: DualDensity | None,
             params: Params) -> float:
    """Euclidean norm / sqrt(M) of the interior weak-form defect vector."""
    grid = u.grid
    K_mid = K.eval(grid.mid)
    P = pairing_vector(h, grid) if h is not None else None
    d = weak_defect(u.values, lam, K_mid, P, grid, params)
    return float(np.linalg.norm(d) / math.sqrt(grid.M))

"""Linearization machinery for p >= 2.

The second-order expansion of the p-energy around the first eigenfunction
produces the matrix operator

    A(a) = |a|^{p-2} (I + (p-2) a (x) a / |a|^2),        A(0) = 0,

whose radial block gives the quadratic form

    Q0(v,v) = 1/2 omega int (p-1)|phi1'|^{p-2} (v')^2 r^{N-1} dr
            - 1/2 lam1 (p-1) omega int K phi1^{p-2} v^2 r^{N-1} dr.

This module assembles the discrete pencil (S, Mass) behind Q0, solves the
generalized eigenproblem by Sturm-sequence bisection on the equivalent
symmetric tridiagonal problem, and exposes the improved Poincare constant
and the two embedding inequalities as samplers.

Convention: the (p-1) of the linearized equation
-div(A(grad phi1) grad u) = lam1 (p-1) K phi1^{p-2} u is carried inside
both S and Mass, so the pencil eigenvalues approximate lam1 itself and
Q0(v,v) = (v^T S v - lam1 v^T Mass v)/2 holds exactly by construction.

Truncation at R_max uses a decay-matched Robin condition instead of a
Dirichlet wall: the exterior solution behaves like r^{-m} with
m = (N-p)/(p-1), so u'(R) = -(m/R) u(R) and the form picks up the boundary
term (p-1)|phi1'(R)|^{p-2} R^{N-1} (m/R) u(R)^2.  A Dirichlet wall biases
the eigenvalues by O(1/R); the matched Robin term reduces this to O(R^-3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import (Params, RadialFunction, RadialGrid, project_perp)
from .eigensolver import EigenPair

__all__ = [
    "AOperatorSample",
    "DiscreteForms",
    "a_matrix",
    "a_quadratic",
    "taylor_sandwich",
    "assemble_discrete",
    "q0_form",
    "generalized_eigs",
    "simplicity_gap",
    "poincare_constant",
    "poincare_ratios",
    "EmbeddingReport",
    "test_embedding_inequalities",
]

_COEF_FLOOR = 1e-300  # structural zero of |phi1'|^{p-2} at r0 for p > 2


def a_matrix(a: np.ndarray, params: Params) -> np.ndarray:
    """A(a) = |a|^{p-2}(I + (p-2) a a^T/|a|^2); A(0) = 0 by definition."""
    a = np.asarray(a, dtype=float)
    n = a.size
    na = float(np.linalg.norm(a))
    if na == 0.0:
        return np.zeros((n, n))
    return na ** (params.p - 2.0) * (
        np.eye(n) + (params.p - 2.0) * np.outer(a, a) / na ** 2)


@dataclass(frozen=True)
class AOperatorSample:
    """A direction a together with the matrix A(a)."""

    a: np.ndarray
    matrix: np.ndarray

    @classmethod
    def at(cls, a: np.ndarray, params: Params) -> "AOperatorSample":
        a = np.asarray(a, dtype=float)
        return cls(a=a, matrix=a_matrix(a, params))


def a_quadratic(a: np.ndarray, v: np.ndarray, params: Params) -> float:
    """<A(a) v, v>; lies in [min(1,p-1), max(1,p-1)] * |a|^{p-2}|v|^2."""
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    na = float(np.linalg.norm(a))
    if na == 0.0:
        return 0.0
    av = float(a @ v)
    return na ** (params.p - 2.0) * (float(v @ v)
                                     + (params.p - 2.0) * av * av / na ** 2)


_TS_X, _TS_W = np.polynomial.legendre.leggauss(64)
_TS_S = 0.5 * (_TS_X + 1.0)   # nodes in [0, 1]
_TS_W = 0.5 * _TS_W


def taylor_sandwich(a: np.ndarray, b: np.ndarray, v: np.ndarray,
                    params: Params) -> tuple[float, float]:
    """(ratio, upper) for the Taylor-form sandwich (p >= 2).

    ratio = int_0^1 <A(a+sb)v, v> (1-s) ds / ((max_s |a+sb|)^{p-2} |v|^2),
    evaluated by 64-point Gauss quadrature in s; the sandwich asserts
    ratio in (0, (p-1)/2].  Returns (ratio, (p-1)/2).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    integral = 0.0
    max_norm = max(float(np.linalg.norm(a)), float(np.linalg.norm(a + b)))
    for s, w in zip(_TS_S, _TS_W):
        c = a + s * b
        max_norm = max(max_norm, float(np.linalg.norm(c)))
        integral += w * (1.0 - s) * a_quadratic(c, v, params)
    denom = max_norm ** (params.p - 2.0) * float(v @ v)
    if denom == 0.0:
        return 0.0, 0.5 * (params.p - 1.0)
    return integral / denom, 0.5 * (params.p - 1.0)


# -- discrete pencil ------------------------------------------------------


@dataclass(frozen=True)
class DiscreteForms:
    """Tridiagonal S and diagonal Mass/Mdeg on the nodes r_1..r_M.

    The r=1 node is eliminated (Dirichlet); the last node is kept with the
    decay-matched Robin term folded into S.  S is stored as (diagonal,
    off-diagonal); Mass and Mdeg are lumped diagonals.
    """

    grid: RadialGrid
    params: Params
    lam1: float
    S_diag: np.ndarray
    S_off: np.ndarray
    Mass_diag: np.ndarray
    Mdeg_diag: np.ndarray

    @property
    def dim(self) -> int:
        return self.S_diag.size

    def s_matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.S_diag * x
        y[:-1] += self.S_off * x[1:]
        y[1:] += self.S_off * x[:-1]
        return y

    def quad_s(self, x: np.ndarray) -> float:
        return float(x @ self.s_matvec(x))

    def quad_mass(self, x: np.ndarray) -> float:
        return float(x @ (self.Mass_diag * x))


def assemble_discrete(eig: EigenPair, K, grid: RadialGrid,
                      params: Params) -> DiscreteForms:
    """Stiffness/mass pencil of the linearization around phi1.

    S: cell-midpoint coefficient (p-1)|phi1'|^{p-2} against exact cell
    volumes of r^{N-1} dr, plus the Robin boundary term at R_max.
    Mass: lumped (p-1) K phi1^{p-2} at the nodes (hat-function weights).
    Mdeg: lumped |phi1'|^p phi1^{-2} (the degenerate-embedding weight).
    """
    if params.regime not in ("linear", "degenerate"):
        raise ValueError("the quadratic form is defined for p >= 2 "
                         f"(regime {params.regime!r})")
    if grid.M < 3:
        raise ValueError("grid has no interior nodes")
    p, om = params.p, params.omega
    m = params.decay_exponent

    dphi_mid = np.asarray(eig.dphi(grid.mid), dtype=float)
    coef = (p - 1.0) * np.abs(dphi_mid) ** (p - 2.0)
    coef = np.maximum(coef, _COEF_FLOOR)
    w_cell = om * coef * grid.cell_vol / grid.h ** 2

    # cell c joins unknowns c-1 and c (node index shifted by the eliminated
    # Dirichlet node at r = 1)
    n = grid.M
    S_diag = np.zeros(n)
    S_diag[: n - 1] = w_cell[: n - 1] + w_cell[1:]
    S_diag[n - 1] = w_cell[n - 1]
    S_off = -w_cell[1:]

    # decay-matched Robin closure at R_max
    R = grid.R_max
    aR = (p - 1.0) * abs(float(eig.dphi(R))) ** (p - 2.0)
    S_diag[-1] += om * max(aR, _COEF_FLOOR) * R ** (params.N - 1.0) * (m / R)

    phi_n = np.asarray(eig.phi(grid.nodes), dtype=float)
    dphi_n = np.asarray(eig.dphi(grid.nodes), dtype=float)
    K_n = np.asarray(K.eval(grid.nodes), dtype=float)
    qw = grid.quad_weights

    mass_full = om * (p - 1.0) * K_n * np.abs(phi_n) ** (p - 2.0) * qw
    with np.errstate(divide="ignore", invalid="ignore"):
        mdeg_full = om * np.abs(dphi_n) ** p * np.where(
            phi_n > 0.0, phi_n, 1.0) ** (-2.0) * qw
    mdeg_full[phi_n <= 0.0] = 0.0

    Mass_diag = mass_full[1:]
    if np.any(Mass_diag <= 0.0):
        raise ValueError("mass diagonal must be positive (K > 0 a.e.)")
    return DiscreteForms(grid=grid, params=params, lam1=eig.lambda1,
                         S_diag=S_diag, S_off=S_off,
                         Mass_diag=Mass_diag, Mdeg_diag=mdeg_full[1:])


def q0_form(v: RadialFunction, w: RadialFunction, eig: EigenPair, K,
            params: Params, forms: DiscreteForms | None = None) -> float:
    """Q0(v,w) = (v^T S w - lam1 v^T Mass w)/2 on nodal functions with
    v(1) = w(1) = 0 (same assembly path as the pencil, hence bilinear and
    symmetric exactly)."""
    if params.regime not in ("linear", "degenerate"):
        raise ValueError("Q0 is defined for p >= 2")
    if v.values[0] != 0.0 or w.values[0] != 0.0:
        raise ValueError("Q0 arguments must vanish at r = 1")
    if forms is None:
        forms = assemble_discrete(eig, K, v.grid, params)
    x, y = v.values[1:], w.values[1:]
    sy = forms.s_matvec(y)
    return 0.5 * (float(x @ sy)
                  - forms.lam1 * float(x @ (forms.Mass_diag * y)))


def generalized_eigs(forms: DiscreteForms, k: int):
    """k smallest eigenpairs of S x = mu Mass x.

    Mass is diagonal, so the pencil reduces to a symmetric tridiagonal
    standard problem after diagonal scaling; eigenvalues come from Sturm
    bisection with inverse iteration for the vectors (LAPACK stebz/stein).
    Returns (mu, X) with columns of X Mass-orthonormal nodal vectors on
    r_1..r_M.
    """
    if k < 1 or k > forms.dim:
        raise ValueError(f"need 1 <= k <= {forms.dim}, got {k}")
    s = 1.0 / np.sqrt(forms.Mass_diag)
    d = forms.S_diag * s * s
    e = forms.S_off * s[:-1] * s[1:]
    mu, Y = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
    X = Y * s[:, None]
    return mu, X


def simplicity_gap(forms: DiscreteForms) -> tuple[float, float, float]:
    """(mu1, mu2, mu2 - mu1); a positive gap is the discrete witness of the
    simplicity of lam1 for the degenerate pencil."""
    mu, _ = generalized_eigs(forms, 2)
    return float(mu[0]), float(mu[1]), float(mu[1] - mu[0])


# -- improved Poincare ----------------------------------------------------


def _cell_energies(values: np.ndarray, grid: RadialGrid, power: float) -> float:
    du = np.diff(values) / grid.h
    return float(np.sum(np.abs(du) ** power * grid.cell_vol))


def poincare_ratios(forms: DiscreteForms, eig: EigenPair, params: Params,
                    trials: int = 500, seed: int = 0,
                    taus=(0.0, 0.1, -0.1, 1.0, -1.0, 10.0, -10.0)) -> np.ndarray:
    """Sampled LHS/RHS ratios of the improved Poincare display (2 < p < N).

    LHS = omega int |tau phi1' + uperp'|^p r^{N-1}
          - lam1 omega int K |tau phi1 + uperp|^p r^{N-1},
    RHS = |tau|^{p-2} omega int |phi1'|^{p-2} |uperp'|^2 r^{N-1}
          + omega int |uperp'|^p r^{N-1}.
    """
    grid, p, om = forms.grid, params.p, params.omega
    K = eig.weight
    rng = np.random.default_rng(seed)
    phi = eig.phi_on(grid)
    K_mid = np.asarray(K.eval(grid.mid), dtype=float)
    dphi_mid = np.asarray(eig.dphi(grid.mid), dtype=float)
    wquad = np.abs(dphi_mid) ** (p - 2.0) * grid.cell_vol
    ratios = []
    for _ in range(trials):
        raw = rng.standard_normal(grid.nodes.size)
        raw[0] = raw[-1] = 0.0
        _, uperp = project_perp(RadialFunction(grid, raw), eig, K)
        uv = uperp.values
        for tau in taus:
            if tau == 0.0 and not np.any(uv):
                continue
            comb = tau * phi.values + uv
            dcomb = np.diff(comb) / grid.h
            comb_mid = 0.5 * (comb[:-1] + comb[1:])
            lhs = om * (float(np.sum(np.abs(dcomb) ** p * grid.cell_vol))
                        - forms.lam1 * float(np.sum(
                            K_mid * np.abs(comb_mid) ** p * grid.cell_vol)))
            dup = np.diff(uv) / grid.h
            rhs = om * (abs(tau) ** (p - 2.0) * float(np.sum(wquad * dup ** 2))
                        + float(np.sum(np.abs(dup) ** p * grid.cell_vol)))
            if rhs == 0.0:
                continue
            ratios.append(lhs / rhs)
    return np.asarray(ratios)


def poincare_constant(forms: DiscreteForms, eig: EigenPair, params: Params,
                      trials: int = 500, seed: int = 0) -> float:
    """p = 2: the exact spectral constant (mu2 - mu1)/mu2 of the pencil.
    2 < p < N: the empirical minimum of the sampled display ratios."""
    if params.regime == "linear":
        mu1, mu2, _ = simplicity_gap(forms)
        return (mu2 - mu1) / mu2
    if params.regime != "degenerate":
        raise ValueError("improved Poincare constant needs p >= 2")
    r = poincare_ratios(forms, eig, params, trials=trials, seed=seed)
    return float(np.min(r))


# -- embedding inequalities (degenerate regime) ----------------------------


@dataclass(frozen=True)
class EmbeddingReport:
    trials: int
    seed: int
    max_violation_quarter: float  # inequality (i), relative
    max_violation_log: float      # inequality (ii), relative

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "max_violation_quarter": self.max_violation_quarter,
            "max_violation_log": self.max_violation_log,
        }


def test_embedding_inequalities(eig: EigenPair, K, grid: RadialGrid,
                                params: Params, trials: int = 500,
                                seed: int = 0) -> EmbeddingReport:
    """Sample the two degenerate-embedding inequalities (p > 2).

    (i)  2 lam1 int K phi1^{p-2} u^2 + int |phi1'|^p phi1^{-2} u^2
         <= 4 int |phi1'|^{p-2} |u'|^2
    (ii) int_{R<=r<=R'} |phi1'|^p phi1^{-2} u^2
         <= 9 log(phi1(r0)^2/(phi1(R) phi1(R'))) int |phi1'|^{p-2}|u'|^2

    with the omega r^{N-1} measure throughout; all integrals share one
    cell-midpoint quadrature so round-off cannot manufacture violations.
    Reports the worst relative violation (positive means violated).
    """
    if not params.p > 2.0:
        raise ValueError("embedding inequalities need p > 2")
    p = params.p
    rng = np.random.default_rng(seed)
    lam1 = eig.lambda1
    r0 = eig.r0

    mid = grid.mid
    phi_mid = np.asarray(eig.phi(mid), dtype=float)
    dphi_mid = np.asarray(eig.dphi(mid), dtype=float)
    K_mid = np.asarray(K.eval(mid), dtype=float)
    vol = grid.cell_vol
    w_mass = K_mid * phi_mid ** (p - 2.0) * vol
    w_deg = np.abs(dphi_mid) ** p * phi_mid ** (-2.0) * vol
    w_grad = np.abs(dphi_mid) ** (p - 2.0) * vol

    nodes = grid.nodes
    i0 = int(np.searchsorted(nodes, r0))
    worst_q = -np.inf
    worst_l = -np.inf
    for _ in range(trials):
        raw = rng.standard_normal(nodes.size)
        raw[0] = raw[-1] = 0.0
        u_mid = 0.5 * (raw[:-1] + raw[1:])
        du = np.diff(raw) / grid.h
        grad2 = float(np.sum(w_grad * du ** 2))
        lhs_q = (2.0 * lam1 * float(np.sum(w_mass * u_mid ** 2))
                 + float(np.sum(w_deg * u_mid ** 2)))
        rhs_q = 4.0 * grad2
        worst_q = max(worst_q, (lhs_q - rhs_q) / rhs_q)

        # random node radii 1 < R < r0 < R'
        iR = int(rng.integers(1, max(2, i0 - 1)))
        iRp = int(rng.integers(min(i0 + 1, nodes.size - 2), nodes.size - 1))
        ring = slice(iR, iRp)  # cells fully inside [nodes[iR], nodes[iRp]]
        lhs_l = float(np.sum(w_deg[ring] * u_mid[ring] ** 2))
        pr0 = float(eig.phi(r0))
        logf = math.log(pr0 * pr0
                        / (float(eig.phi(nodes[iR])) * float(eig.phi(nodes[iRp]))))
        rhs_l = 9.0 * logf * grad2
        if rhs_l > 0.0:
            worst_l = max(worst_l, (lhs_l - rhs_l) / rhs_l)
    return EmbeddingReport(trials=trials, seed=seed,
                           max_violation_quarter=float(worst_q),
                           max_violation_log=float(worst_l))

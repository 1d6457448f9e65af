"""First eigenpair of the radial p-Laplacian on the exterior of the unit ball.

The eigenproblem

    -(r^{N-1} |phi'|^{p-2} phi')' = lam r^{N-1} K(r) phi^{p-1},
    phi(1) = 0,  phi(r) -> 0 as r -> infinity,

is solved by shooting in flux form: with q := r^{N-1}|phi'|^{p-2}phi' the
system (phi, q) is regular across the critical radius r0 where phi' = 0,
for every p > 1.  The root in lam is bracketed by a continuous score built
from the Riccati variable

    U(r) = r^{p-1} (-phi'/phi)^{p-1} = |q| r^{p-N} / phi^{p-1}:

at lam = lam1 the trajectory satisfies U < C_Np = ((N-p)/(p-1))^{p-1}
everywhere, while any larger lam drives U through that ceiling before phi
eventually crosses zero.  Brent iteration on (sup U - C_Np) resolves lam1
to near machine precision on the truncated interval, and the reported lam
is nudged to the subcritical side so the ceiling holds along the whole
reported trajectory.

The integrator is a Dormand-Prince 4(5) pair with steps aligned to the
weight's discontinuity set (the plateau edges of the catalog weights), so
no step straddles a jump of K; dense output is cubic Hermite on the
accepted steps, with the step size additionally capped at a fixed fraction
of r to keep interpolation error below the identity tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import Params, RadialFunction, RadialGrid
from .weights import RadialWeight

__all__ = [
    "Trajectory",
    "EigenPair",
    "RiccatiTrace",
    "integrate_radial",
    "classify_trajectory",
    "find_lambda1",
    "riccati_trace",
    "verify_riccati_ode",
    "verify_integral_identity",
    "verify_log_identity",
    "asymptotic_constants",
]

_GX5, _GW5 = np.polynomial.legendre.leggauss(5)


class StiffnessError(RuntimeError):
    """Step size underflow; carries the diagnostic state."""

    def __init__(self, r: float, y, msg: str = "step underflow"):
        super().__init__(f"{msg} at r={r:.6g}, state={y}")
        self.r = r
        self.y = y


class _HermitePath:
    """Cubic-Hermite dense output over accepted RK nodes.

    At breakpoints of the right-hand side the derivative is one-sided: the
    interval [t_j, t_{j+1}] uses the right limit at t_j and the left limit
    at t_{j+1} (`f_left` defaults to `f` when no jumps are present).
    """

    def __init__(self, t: np.ndarray, y: np.ndarray, f: np.ndarray,
                 f_left: np.ndarray | None = None):
        self.t = t  # (n,)
        self.y = y  # (n, d)
        self.f = f  # (n, d) right limits
        self.f_left = f if f_left is None else f_left

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        rr = np.clip(np.atleast_1d(r), self.t[0], self.t[-1])
        i = np.clip(np.searchsorted(self.t, rr, side="right") - 1, 0, len(self.t) - 2)
        h = self.t[i + 1] - self.t[i]
        s = (rr - self.t[i]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        out = (h00[:, None] * self.y[i] + h10[:, None] * (h[:, None] * self.f[i])
               + h01[:, None] * self.y[i + 1]
               + h11[:, None] * (h[:, None] * self.f_left[i + 1]))
        return out[0] if scalar else out


def _integrate(rhs, r0: float, y0, r_end: float, breakpoints: np.ndarray,
               rtol: float, atol, stop_on_sign_drop: bool,
               h_frac: float = 5e-3, h_init: float = 1e-4):
    """Breakpoint-aligned embedded RK45 for a 2-component system.

    rhs(r, u, v) -> (du, dv).  Steps never straddle an entry of
    `breakpoints`, so discontinuous right-hand sides are integrated as a
    sequence of smooth segments.  Returns (path, crossed, r_cross); if
    stop_on_sign_drop, integration terminates where component 0 crosses zero
    from above (located on the Hermite interpolant of the last step).

    The stage arithmetic is unrolled to scalars (Dormand-Prince
    coefficients inlined) because this loop dominates the bisection cost.
    """
    at0, at1 = float(atol[0]), float(atol[1])
    bps = [float(b) for b in breakpoints if r0 < b < r_end]
    nbp = len(bps)
    bp_idx = 0
    u, v = float(y0[0]), float(y0[1])
    fu, fv = rhs(r0, u, v)
    ts = [r0]
    ys = [(u, v)]
    fs = [(fu, fv)]   # right limits: Hermite left ends and FSAL first stage
    fls = [(fu, fv)]  # left limits: Hermite right ends across weight jumps
    r = r0
    h_prop = h_init  # error-controlled proposal; caps below do not shrink it
    crossed = False
    r_cross = None
    min_h = 1e-14
    while r < r_end:
        cap = min(h_frac * max(r, 1.0), r_end - r)
        if bp_idx < nbp:
            gap = bps[bp_idx] - r
            # stretch onto the breakpoint rather than leaving a sliver
            cap = gap if gap <= 1.1 * min(h_prop, cap) else min(cap, gap)
        h = min(h_prop, cap)
        capped = h < h_prop
        if h < min_h * max(r, 1.0):
            raise StiffnessError(r, (u, v))
        # Stages at c=1 must see the left limit of a piecewise weight when the
        # step ends on a breakpoint, so pull their abscissa just inside.
        r_top = r + h
        on_bp = bp_idx < nbp and r_top >= bps[bp_idx] - 1e-12 * r_top
        r_edge = r_top - 4e-13 * r_top if on_bp else r_top
        k1u, k1v = fu, fv
        k2u, k2v = rhs(r + 0.2 * h, u + h * 0.2 * k1u, v + h * 0.2 * k1v)
        k3u, k3v = rhs(r + 0.3 * h,
                       u + h * (0.075 * k1u + 0.225 * k2u),
                       v + h * (0.075 * k1v + 0.225 * k2v))
        k4u, k4v = rhs(r + 0.8 * h,
                       u + h * (0.9777777777777777 * k1u - 3.7333333333333334 * k2u
                                + 3.5555555555555554 * k3u),
                       v + h * (0.9777777777777777 * k1v - 3.7333333333333334 * k2v
                                + 3.5555555555555554 * k3v))
        k5u, k5v = rhs(r + 0.8888888888888888 * h,
                       u + h * (2.9525986892242035 * k1u - 11.595793324188385 * k2u
                                + 9.822892851699436 * k3u - 0.2908093278463649 * k4u),
                       v + h * (2.9525986892242035 * k1v - 11.595793324188385 * k2v
                                + 9.822892851699436 * k3v - 0.2908093278463649 * k4v))
        k6u, k6v = rhs(r_edge,
                       u + h * (2.8462752525252526 * k1u - 10.757575757575758 * k2u
                                + 8.906422717743473 * k3u + 0.2784090909090909 * k4u
                                - 0.2735313036020583 * k5u),
                       v + h * (2.8462752525252526 * k1v - 10.757575757575758 * k2v
                                + 8.906422717743473 * k3v + 0.2784090909090909 * k4v
                                - 0.2735313036020583 * k5v))
        y5u = u + h * (0.09114583333333333 * k1u + 0.44923629829290207 * k3u
                       + 0.6510416666666666 * k4u - 0.322376179245283 * k5u
                       + 0.13095238095238096 * k6u)
        y5v = v + h * (0.09114583333333333 * k1v + 0.44923629829290207 * k3v
                       + 0.6510416666666666 * k4v - 0.322376179245283 * k5v
                       + 0.13095238095238096 * k6v)
        k7u, k7v = rhs(r_edge, y5u, y5v)
        eu = h * (0.0012326388888888888 * k1u - 0.0042527702905061394 * k3u
                  + 0.036979166666666667 * k4u - 0.05086379716981132 * k5u
                  + 0.041904761904761904 * k6u - 0.025 * k7u)
        ev = h * (0.0012326388888888888 * k1v - 0.0042527702905061394 * k3v
                  + 0.036979166666666667 * k4v - 0.05086379716981132 * k5v
                  + 0.041904761904761904 * k6v - 0.025 * k7v)
        su = at0 + rtol * max(abs(u), abs(y5u))
        sv = at1 + rtol * max(abs(v), abs(y5v))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
        if err <= 1.0:
            r_new = r + h
            ts.append(r_new)
            ys.append((y5u, y5v))
            fs.append((k7u, k7v))
            fls.append((k7u, k7v))
            if stop_on_sign_drop and y5u <= 0.0 < u:
                crossed = True
                break
            if on_bp:
                bp_idx += 1
                # right limit across the jump (abscissa nudged right so a
                # closed plateau edge reads the next segment's value)
                fs[-1] = rhs(r_new + 4e-13 * r_new, y5u, y5v)
            r, u, v = r_new, y5u, y5v
            fu, fv = fs[-1]
            if not capped:
                h_prop = h * (min(5.0, max(0.2, 0.9 * err ** -0.2))
                              if err > 0.0 else 5.0)
        else:
            h_prop = h * max(0.2, 0.9 * err ** -0.2)
    path = _HermitePath(np.asarray(ts), np.asarray(ys), np.asarray(fs),
                        np.asarray(fls))
    if crossed:
        a, b = path.t[-2], path.t[-1]
        fn = lambda x: float(path(x)[0])
        r_cross = brentq(fn, a, b, xtol=1e-13) if fn(b) < 0.0 else b
    return path, crossed, r_cross


def _scalar_weight(W: RadialWeight):
    """Fast scalar closure for K(r), used inside the ODE right-hand side."""
    kind = W.kind
    if kind == "power":
        a = W.alpha
        return lambda r: r ** (-a)
    if kind == "linear_r4":
        return lambda r: r ** (-4.0)
    zeta, iota, pw, eta = W.zeta, W.iota, W.p, W.eta

    def plateau_family(r: float) -> float:
        n = math.floor(r)
        if r <= n + n ** (-zeta):
            if kind == "k2":
                return r ** (-pw)
            return r ** (-pw) / (1.0 + math.log(r))
        return r ** (-(pw + iota))

    if kind in ("k1", "k2"):
        return plateau_family

    def k3(r: float) -> float:
        if r < 2.0:
            return (2.0 - r) ** eta
        return plateau_family(r)

    return k3


@dataclass(frozen=True)
class Trajectory:
    lam: float
    params: Params
    weight: RadialWeight
    r_end: float
    path: _HermitePath
    crossed: bool
    r_cross: float | None

    @property
    def r_last(self) -> float:
        return float(self.path.t[-1])

    def phi_q(self, r):
        y = self.path(r)
        if y.ndim == 1:
            return float(y[0]), float(y[1])
        return y[:, 0], y[:, 1]

    def phi(self, r):
        phi, _ = self.phi_q(r)
        return phi

    def dphi(self, r):
        _, q = self.phi_q(r)
        rp = np.asarray(r, dtype=float) ** (self.params.N - 1)
        return np.sign(q) * (np.abs(q) / rp) ** (1.0 / (self.params.p - 1.0))

    def U(self, r):
        """Riccati variable, valid where phi > 0 and phi' <= 0."""
        phi, q = self.phi_q(r)
        r = np.asarray(r, dtype=float)
        return np.abs(q) * r ** (self.params.p - self.params.N) / np.asarray(phi) ** (self.params.p - 1.0)

    def sup_U_nodes(self) -> float:
        """sup of U over the accepted step nodes where phi' < 0 < phi."""
        t, y = self.path.t, self.path.y
        mask = (y[:, 1] < 0.0) & (y[:, 0] > 0.0)
        if not np.any(mask):
            return -math.inf
        r, phi, q = t[mask], y[mask, 0], y[mask, 1]
        U = np.abs(q) * r ** (self.params.p - self.params.N) / phi ** (self.params.p - 1.0)
        return float(np.max(U))


def integrate_radial(lam: float, W: RadialWeight, params: Params,
                     r_end: float, rtol: float = 1e-10,
                     atol: tuple[float, float] = (1e-16, 1e-14)) -> Trajectory:
    """Shoot from (phi, q)(1) = (0, 1) to r_end or the first zero of phi."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    p, N = params.p, params.N
    pm1 = p - 1.0
    Kf = _scalar_weight(W)

    inv = 1.0 / pm1

    def rhs(r, phi, q):
        rp = r ** (N - 1)
        dphi = math.copysign(abs(q / rp) ** inv, q)
        dq = -lam * rp * Kf(r) * math.copysign(abs(phi) ** pm1, phi)
        return dphi, dq

    path, crossed, r_cross = _integrate(
        rhs, 1.0, (0.0, 1.0), r_end, W.breakpoints(1.0, r_end),
        rtol=rtol, atol=atol, stop_on_sign_drop=True)
    return Trajectory(lam=lam, params=params, weight=W, r_end=r_end,
                      path=path, crossed=crossed, r_cross=r_cross)


def classify_trajectory(traj: Trajectory, theta: float = 0.2) -> tuple[str, float | None]:
    """Tag in {Crossing, Subcritical, Decaying} with the dead band theta."""
    if traj.crossed:
        return "Crossing", traj.r_cross
    r = traj.r_last
    phi, q = traj.phi_q(r)
    if q >= 0.0:
        return "Subcritical", None
    U = float(traj.U(r))
    C = traj.params.C_Np
    if abs(U - C) <= theta * C:
        return "Decaying", None
    if U < C * (1.0 - theta):
        return "Subcritical", None
    return "Crossing", r  # past the ceiling: a crossing is imminent


def _score(traj: Trajectory) -> float:
    """Continuous bisection score: negative below lam1, positive above."""
    C = traj.params.C_Np
    if traj.crossed:
        return 10.0 * C + 1.0 / traj.r_cross
    s = traj.sup_U_nodes() - C
    return min(s, 10.0 * C) if math.isfinite(s) else -C


@dataclass(frozen=True)
class EigenPair:
    lambda1: float
    params: Params
    weight: RadialWeight
    traj: Trajectory  # un-normalized shooting trajectory
    scale: float  # phi1 = scale * traj.phi
    r0: float
    C_asym: float
    D_asym: float
    norm_value: float  # omega int K |phi1|^p r^{N-1} dr (head + tail estimate)
    r_end: float

    def phi(self, r):
        return self.scale * np.asarray(self.traj.phi(r))

    def dphi(self, r):
        return self.scale * np.asarray(self.traj.dphi(r))

    def q(self, r):
        _, q = self.traj.phi_q(r)
        return self.scale ** (self.params.p - 1.0) * np.asarray(q)

    def U(self, r):
        return self.traj.U(r)

    def phi_on(self, grid: RadialGrid) -> RadialFunction:
        if grid.R_max > self.r_end + 1e-9:
            raise ValueError("grid extends beyond the computed trajectory")
        vals = np.asarray(self.phi(grid.nodes), dtype=float)
        vals[0] = 0.0
        return RadialFunction(grid, vals)


def _norm_integral(traj: Trajectory, params: Params, W: RadialWeight,
                   C_raw: float) -> float:
    """omega int_1^inf K |phi|^p r^{N-1} dr for the raw trajectory.

    Head on [1, r_end] by Gauss panels split at the weight's breakpoints;
    tail beyond r_end via the asymptotic profile phi ~ C r^{-m} against the
    analytic tail bound for K (the tail is O(1e-6) of the head, so the
    slack in the bound is far below the normalization tolerance).
    """
    p, N = params.p, params.N
    r_end = traj.r_last
    edges = np.unique(np.concatenate([
        np.geomspace(1.0, r_end, 2001),
        W.breakpoints(1.0, r_end),
    ]))
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b)[:, None] + half[:, None] * _GX5[None, :]
    flat = nodes.ravel()
    phi = np.asarray(traj.phi(flat))
    Kv = W.eval(flat)
    vals = Kv * np.abs(phi) ** p * flat ** (N - 1)
    head = float(np.sum((vals.reshape(nodes.shape) * _GW5[None, :]).sum(axis=1) * half))
    m = params.decay_exponent
    tail = abs(C_raw) ** p * W.tail_integral_bound(r_end, N - 1 - m * p)
    return params.omega * (head + tail)


def _double_tail(W: RadialWeight, R: float, p: float, m: float) -> float:
    """int_R^inf s^{m-1} T(s) ds with T(s) = int_s^inf t^{p-1-m} K(t) dt.

    This is the integral that drives A(inf) - A(R): linearizing the Riccati
    equation around U = C_Np gives U - C_Np ~ -lam s^m T(s), hence
    A(inf) - A(R) = lam m^{2-p} * double_tail(R).
    """
    if W.kind == "power":
        a = W.alpha
    elif W.kind == "linear_r4":
        a = 4.0
    else:
        a = W.p + W.iota
    if a <= p:
        return math.inf
    off = R ** (p - a) / ((a - p + m) * (a - p))
    if W.kind in ("power", "linear_r4"):
        return off
    # exchange the order: each plateau excess at n >= R contributes its
    # t^{p-1-m} K excess times int_R^n s^{m-1} ds = (n^m - R^m)/m
    return off + W._plateau_excess_sum(R, p - 1.0 - m,
                                       factor=lambda n: (n ** m - R ** m) / m)


def _raw_asym(traj: Trajectory, params: Params, r0: float) -> tuple[float, float]:
    """Estimates of C = lim r^m phi and D = lim r^{(N-1)/(p-1)} phi'.

    Truncating at a finite radius R leaves O(1/R)-sized tails which are
    removed analytically: the log identity gives
    C = R^m phi(R) exp((A(inf) - A(R))/(p-1)) with the A-tail evaluated by
    linearizing the Riccati equation around its fixed point, and the flux
    q = r^{N-1}|phi'|^{p-2}phi' satisfies
    q(inf) = q(R) - lam C^{p-1} int_R^inf s^{p-1} K ds once phi ~ C s^{-m}.
    Forward shooting contaminates phi with the bounded solution at relative
    size eps * r^{2m}, so the corrected values are formed on dyadic radii
    and the flattest window of four wins.
    """
    p, m = params.p, params.decay_exponent
    lam, W = traj.lam, traj.weight
    radii = []
    r = traj.r_last
    while r > max(8.0 * r0, 4.0) and len(radii) < 12:
        radii.append(r)
        r /= math.sqrt(2.0)
    while len(radii) < 4:
        radii.append(radii[-1] / math.sqrt(2.0) if radii else traj.r_last)
    radii = np.asarray(radii[::-1])  # increasing

    phi = np.asarray(traj.phi(radii))
    q = np.asarray([traj.phi_q(R)[1] for R in radii])
    dA = np.asarray([lam * m ** (2.0 - p) * _double_tail(W, R, p, m)
                     for R in radii])
    c = phi * radii ** m * np.exp(dA / (p - 1.0))
    q_inf = q - lam * c ** (p - 1.0) * np.asarray(
        [W.tail_moment(R, p - 1.0) for R in radii])
    d = -np.abs(q_inf) ** (1.0 / (p - 1.0)) * np.sign(-q_inf)

    # flattest window of 4 consecutive radii in the corrected values
    var = np.array([np.ptp(c[k:k + 4]) / max(abs(c[k + 3]), 1e-300)
                    for k in range(len(c) - 3)])
    k = int(np.argmin(var))
    return float(np.mean(c[k:k + 4])), float(np.mean(d[k:k + 4]))


def find_lambda1(W: RadialWeight, params: Params, tol: float = 1e-11,
                 r_end: float = 1e3, r_end_bisect: float | None = None) -> EigenPair:
    """Brent iteration on the Riccati score between subcritical and
    supercritical trajectories; the score root is lam1 on the truncated
    interval, sharp to O(r_end_bisect^{-2}) relative or better."""
    if not 1.0 < params.p < params.N:
        raise ValueError("requires 1 < p < N")
    if W.kind in ("k1", "k2", "k3") and W.p != params.p:
        raise ValueError(
            f"weight carries p={W.p} but the problem has p={params.p}; "
            f"pass the weight spec with the matching p")
    R_b = r_end_bisect or r_end
    shoot = lambda lam, R: integrate_radial(lam, W, params, R)
    lam_hi = 1.0
    lam_lo = 0.0
    for _ in range(80):
        if _score(shoot(lam_hi, R_b)) > 0.0:
            break
        lam_lo = lam_hi
        lam_hi *= 2.0
    else:
        raise RuntimeError("no supercritical bracket found; increase lam_hi")
    lam = brentq(lambda x: _score(shoot(x, R_b)), lam_lo, lam_hi,
                 xtol=tol, rtol=max(tol, 4e-16))

    # nudge to the subcritical side so U <= C_Np holds on the whole trajectory
    traj = None
    for back in (0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8):
        cand = lam * (1.0 - back)
        t = shoot(cand, r_end)
        if not t.crossed and t.sup_U_nodes() < params.C_Np:
            lam, traj = cand, t
            break
    if traj is None:
        raise RuntimeError("could not stabilize a subcritical trajectory")

    # r0: the unique zero of q (q(1) = 1 > 0 and q strictly decreasing)
    tq, yq = traj.path.t, traj.path.y
    idx = np.nonzero(yq[:, 1] <= 0.0)[0]
    if idx.size == 0:
        raise RuntimeError("phi' does not change sign before r_end")
    i = int(idx[0])
    r0 = brentq(lambda r: traj.phi_q(r)[1], tq[i - 1], tq[i], xtol=1e-13)

    C_raw, D_raw = _raw_asym(traj, params, r0)
    norm_raw = _norm_integral(traj, params, W, C_raw)
    scale = norm_raw ** (-1.0 / params.p)
    return EigenPair(lambda1=lam, params=params, weight=W, traj=traj,
                     scale=scale, r0=float(r0),
                     C_asym=scale * C_raw, D_asym=scale * D_raw,
                     norm_value=1.0, r_end=traj.r_last)


# -- Riccati machinery ---------------------------------------------------


@dataclass(frozen=True)
class RiccatiTrace:
    eig: EigenPair
    r: np.ndarray
    U: np.ndarray
    a: np.ndarray
    A: np.ndarray  # A_{r0}(r) = int_{r0}^r a
    C_Np: float
    aux_path: _HermitePath  # dense (A, I), I(r) = lam int_{r0}^r s^{p-1} K e^{A} ds

    def A_at(self, r):
        out = self.aux_path(r)
        return out[..., 0] if out.ndim > 1 else out[0]

    def I_at(self, r):
        out = self.aux_path(r)
        return out[..., 1] if out.ndim > 1 else out[1]


def riccati_trace(eig: EigenPair, samples: int = 10_000,
                  r_hi: float | None = None) -> RiccatiTrace:
    """U, a and A_{r0} at log-spaced radii in [r0, r_end]."""
    params, traj = eig.params, eig.traj
    p = params.p
    m = params.decay_exponent
    r_hi = r_hi or traj.r_last
    r = np.geomspace(eig.r0, r_hi, samples)
    r[0] = eig.r0
    U = np.asarray(traj.U(r), dtype=float)
    U[0] = 0.0
    a = (p - 1.0) / r * (m - U ** (1.0 / (p - 1.0)))
    Kf = _scalar_weight(eig.weight)
    lam = eig.lambda1
    expo = 1.0 / (p - 1.0)

    def aux_rhs(s, A_s, I_s):
        Us = traj.U(s) if s > eig.r0 else 0.0
        Us = max(float(Us), 0.0)
        a_s = (p - 1.0) / s * (m - Us ** expo)
        return a_s, lam * s ** (p - 1.0) * Kf(s) * math.exp(A_s)

    aux, _, _ = _integrate(aux_rhs, eig.r0, (0.0, 0.0), r_hi,
                           eig.weight.breakpoints(eig.r0, r_hi),
                           rtol=1e-10, atol=(1e-13, 1e-13),
                           stop_on_sign_drop=False)
    A = aux(r)[:, 0]
    A[0] = 0.0
    return RiccatiTrace(eig=eig, r=r, U=U, a=a, A=A, C_Np=params.C_Np,
                        aux_path=aux)


def _smooth_stencils(trace: RiccatiTrace) -> np.ndarray:
    """Interior sample indices whose central-difference stencil avoids
    discontinuities of K (where U' jumps and the pointwise ODE residual is
    not defined)."""
    r = trace.r
    bps = trace.eig.weight.breakpoints(float(r[0]), float(r[-1]))
    ok = np.ones(r.size, dtype=bool)
    ok[0] = ok[-1] = False
    if bps.size:
        lo = np.searchsorted(bps, r[:-2])
        hi = np.searchsorted(bps, r[2:])
        ok[1:-1] &= lo == hi
    return np.nonzero(ok)[0]


def verify_riccati_ode(trace: RiccatiTrace, eig: EigenPair,
                       indices: np.ndarray | None = None) -> float:
    """Max |dU/dr - RHS| by central differences on smooth stencils."""
    p = eig.params.p
    m = eig.params.decay_exponent
    r, U = trace.r, trace.U
    if indices is None:
        indices = _smooth_stencils(trace)
    i = indices
    dU = (U[i + 1] - U[i - 1]) / (r[i + 1] - r[i - 1])
    Kv = eig.weight.eval(r[i])
    rhs = ((p - 1.0) / r[i] * U[i] * (U[i] ** (1.0 / (p - 1.0)) - m)
           + eig.lambda1 * r[i] ** (p - 1.0) * Kv)
    return float(np.max(np.abs(dU - rhs)))


def verify_integral_identity(trace: RiccatiTrace, eig: EigenPair,
                             t: float | None = None) -> float:
    """Residual of U(r) - U(t) e^{-(A(r)-A(t))} = lam int_t^r s^{p-1}K e^{-(A(r)-A(s))} ds."""
    t = eig.r0 if t is None else t
    if t < eig.r0 - 1e-12:
        raise ValueError("identity requires t >= r0")
    r, U = trace.r, trace.U
    sel = r >= t
    A_t = float(trace.A_at(t))
    U_t = float(eig.traj.U(t)) if t > eig.r0 else 0.0
    lhs = U[sel] - U_t * np.exp(-(trace.A[sel] - A_t))
    rhs = np.exp(-trace.A[sel]) * (np.asarray(trace.I_at(r[sel])) - float(trace.I_at(t)))
    return float(np.max(np.abs(lhs - rhs)))


def verify_log_identity(trace: RiccatiTrace, eig: EigenPair) -> tuple[float, float]:
    """Residual of A_t(r) = (p-1) log( r^m phi(r) / (t^m phi(t)) ), t = r0,
    plus the finite witness A_{r0}(r_end)."""
    m = eig.params.decay_exponent
    p = eig.params.p
    r = trace.r
    phi = np.asarray(eig.traj.phi(r), dtype=float)
    ref = eig.r0 ** m * float(eig.traj.phi(eig.r0))
    rhs = (p - 1.0) * np.log(r ** m * phi / ref)
    res = float(np.max(np.abs(trace.A - rhs)))
    return res, float(trace.A[-1])


def asymptotic_constants(eig: EigenPair) -> tuple[float, float]:
    """(C, D) with r^m phi1 -> C and r^{(N-1)/(p-1)} phi1' -> D = -mC."""
    params = eig.params
    if not params.p < params.N:
        raise ValueError("asymptotics require p < N")
    C, D = _raw_asym(eig.traj, params, eig.r0)
    return eig.scale * C, eig.scale * D

"""Radial weight catalog and numerical checkers for the standing hypotheses.

Catalog members (all positive a.e. on (1, infinity)):

  power(alpha)          K(r) = r^{-alpha}
  linear_r4             K(r) = r^{-4}         (the closed-form test case)
  k1(zeta, iota, p)     K(r) = 1/(r^p (1+log r)) on the plateaus
                        U_n [n, n+n^{-zeta}], and r^{-(p+iota)} off them
  k2(zeta, iota, p)     like k1 but with plateau value r^{-p}
  k3(zeta, iota, p, eta) (2-r)^eta on [1,2), k1 on [2, infinity)

Checked hypotheses: admissibility int_1^inf K r^{p-1} dr < inf; (H):
K in L^inf and int K s^delta ds < inf for some delta in (p-1, N-1); (W):
local integrability of K^{-1} and of f(r) = |int_t^r K|^{(2-p)/(p-1)};
and the compactness decay condition ess sup_{r>=rho} r^p K(r) -> 0.

Every truncated integral is reported together with an explicit analytic
power-law bound for the tail beyond the quadrature horizon.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from urllib.parse import parse_qs

import numpy as np

from .core import Params

__all__ = [
    "RadialWeight",
    "HypothesisReport",
    "make_weight",
    "eval_weight",
    "check_admissible",
    "check_H",
    "check_W",
    "decay_sup",
    "full_report",
]


def _plateau_mask(r: np.ndarray, zeta: float) -> np.ndarray:
    """Membership in U_n [n, n + n^{-zeta}].

    The intervals are disjoint for zeta > 1, so n = floor(r) decides.
    """
    n = np.floor(r)
    return r <= n + n ** (-zeta)


@dataclass(frozen=True)
class RadialWeight:
    kind: str
    alpha: float = 0.0
    zeta: float = 2.0
    iota: float = 1.0
    p: float = 2.0
    eta: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in ("power", "linear_r4", "k1", "k2", "k3"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind in ("k1", "k2", "k3"):
            if self.zeta <= 1.0:
                raise ValueError("plateau family needs zeta > 1")
            if self.iota <= 0.0:
                raise ValueError("plateau family needs iota > 0")
        if self.kind == "k3" and not self.eta > 0.0:
            raise ValueError("k3 needs eta > 0")

    # -- evaluation -----------------------------------------------------

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        if np.any(r < 1.0):
            raise ValueError("weights are defined on r >= 1")
        out = self._eval_array(r)
        return float(out[0]) if scalar else out

    def _eval_array(self, r: np.ndarray) -> np.ndarray:
        k = self.kind
        if k == "power":
            return r ** (-self.alpha)
        if k == "linear_r4":
            return r ** (-4.0)
        if k == "k1":
            return np.where(_plateau_mask(r, self.zeta),
                            r ** (-self.p) / (1.0 + np.log(r)),
                            r ** (-(self.p + self.iota)))
        if k == "k2":
            return np.where(_plateau_mask(r, self.zeta),
                            r ** (-self.p),
                            r ** (-(self.p + self.iota)))
        # k3
        out = np.empty_like(r)
        left = r < 2.0
        out[left] = (2.0 - r[left]) ** self.eta
        rr = r[~left]
        out[~left] = np.where(_plateau_mask(rr, self.zeta),
                              rr ** (-self.p) / (1.0 + np.log(rr)),
                              rr ** (-(self.p + self.iota)))
        return out

    # -- structure ------------------------------------------------------

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        """Discontinuities / kinks of K in (lo, hi), for piecewise quadrature."""
        pts: list[float] = []
        if self.kind in ("k1", "k2", "k3"):
            n0 = max(1, int(math.floor(lo)))
            for n in range(n0, int(math.ceil(hi)) + 1):
                for b in (float(n), n + float(n) ** (-self.zeta)):
                    if lo < b < hi:
                        pts.append(b)
        if self.kind == "k3" and lo < 2.0 < hi:
            pts.append(2.0)
        return np.unique(np.asarray(pts, dtype=float))

    def zeros(self) -> list[tuple[float, float]]:
        """(location, local power exponent) of interior zeros of K."""
        if self.kind == "k3":
            return [(2.0, self.eta)]
        return []

    def tail_majorant(self) -> tuple[float, float]:
        """(c, a) with K(r) <= c r^{-a} for all r beyond any horizon >= 2."""
        if self.kind == "power":
            return 1.0, self.alpha
        if self.kind == "linear_r4":
            return 1.0, 4.0
        # plateau families: off-plateau r^{-p-iota} dominates the plateau
        # value eventually only via the extra 1/(1+log r) (k1/k3) --- use
        # the safe common majorant r^{-p} (plateaus of k2) resp.
        # r^{-p}/(1+log r) <= r^{-p} (k1/k3).  The plateau *measure* decay is
        # accounted separately in tail_integral_bound.
        return 1.0, self.p

    def tail_integral_bound(self, R: float, q: float) -> float:
        """Analytic upper bound for int_R^inf K(s) s^q ds (may be inf)."""
        if R < 2.0:
            raise ValueError("tail bounds assume a horizon R >= 2")

        def power_tail(c: float, a: float) -> float:
            # int_R^inf c s^{q-a} ds
            if a - q > 1.0:
                return c * R ** (q - a + 1.0) / (a - q - 1.0)
            return math.inf

        if self.kind == "power":
            return power_tail(1.0, self.alpha)
        if self.kind == "linear_r4":
            return power_tail(1.0, 4.0)
        # k1/k2/k3 beyond R >= 2: off-plateau part is a pure power; the
        # plateau part is a sum over n >= floor(R) of width n^{-zeta} times
        # the plateau value at most n^{-p} (1/(1+log) <= 1), bounded by
        # sum n^{q-p-zeta} <= int_{R-1}^inf s^{q-p-zeta} ds for decreasing
        # summands.
        off = power_tail(1.0, self.p + self.iota)
        expo = self.p + self.zeta - q
        if expo > 1.0:
            base = max(R - 1.0, 1.0)
            plateau = base ** (1.0 - expo) / (expo - 1.0) + base ** (-expo)
        else:
            plateau = math.inf
        return off + plateau

    def _plateau_excess_sum(self, R: float, q: float, factor=None) -> float:
        """sum over plateaus [n, n+n^{-zeta}], n >= R, of
        width * (plateau value - off value) * n^q [* factor(n)].

        The plateau widths shrink fast enough that evaluating the integrand
        at the left endpoint is accurate to a relative O(n^{-1}) per term.
        """
        def block_sum(lo: int, hi: int) -> float:
            n = np.arange(lo, hi, dtype=float)
            if self.kind == "k2":
                value = n ** (-self.p)
            else:  # k1, and k3 beyond r = 2
                value = n ** (-self.p) / (1.0 + np.log(n))
            excess = n ** (-self.zeta) * (value - n ** (-(self.p + self.iota)))
            term = excess * n ** q
            if factor is not None:
                term = term * factor(n)
            return float(np.sum(term))

        total = 0.0
        lo = max(2, int(math.ceil(R)))
        stop = 64 * lo
        prev = None
        while lo < stop:
            block = block_sum(lo, 2 * lo)
            total += block
            prev, lo = block, 2 * lo
            if prev is not None and abs(block) <= 1e-12 * abs(total):
                return total
        # polynomially decaying summands: per doubling the block shrinks by a
        # fixed ratio, so extend the last block geometrically
        last = block_sum(lo, 2 * lo)
        total += last
        rho = last / prev if prev else 0.0
        if 0.0 < rho < 0.9:
            total += last * rho / (1.0 - rho)
        return total

    def tail_moment(self, R: float, q: float) -> float:
        """Accurate value (not just a bound) of int_R^inf K(t) t^q dt, R >= 2.

        Power-law parts are integrated in closed form; the plateau excess of
        the k1/k2/k3 families is a fast-converging sum taken directly.
        """
        if R < 2.0:
            raise ValueError("tail moments assume a horizon R >= 2")

        def power_tail(a: float) -> float:
            if a - q <= 1.0:
                return math.inf
            return R ** (q - a + 1.0) / (a - q - 1.0)

        if self.kind == "power":
            return power_tail(self.alpha)
        if self.kind == "linear_r4":
            return power_tail(4.0)
        off = power_tail(self.p + self.iota)
        if math.isinf(off):
            return off
        return off + self._plateau_excess_sum(R, q)


# -- catalog construction ----------------------------------------------


def make_weight(spec: str) -> RadialWeight:
    """Build a weight from a CLI id like 'k1?zeta=2&iota=1' or 'power?alpha=4'."""
    if "?" in spec:
        kind, qs = spec.split("?", 1)
        kv = {k: float(v[0]) for k, v in parse_qs(qs).items()}
    else:
        kind, kv = spec, {}
    kind = kind.strip().lower()
    if kind == "linear_r4":
        return RadialWeight(kind="linear_r4")
    if kind == "power":
        return RadialWeight(kind="power", alpha=kv.get("alpha", 4.0))
    if kind in ("k1", "k2", "k3"):
        return RadialWeight(kind=kind,
                            zeta=kv.get("zeta", 2.0),
                            iota=kv.get("iota", 1.0),
                            p=kv.get("p", 2.0),
                            eta=kv.get("eta", 0.5))
    raise ValueError(f"unknown weight id {spec!r}")


def eval_weight(W: RadialWeight, r):
    return W.eval(r)


# -- quadrature with breakpoints ---------------------------------------

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(24)


def _gauss_panel(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _GAUSS_X
    return half * float(np.sum(_GAUSS_W * f(x)))


def integrate_weighted(W: RadialWeight, q: float, lo: float, hi: float,
                       rtol: float = 1e-9) -> float:
    """int_lo^hi K(s) s^q ds on log-spaced panels split at K's breakpoints."""
    if hi <= lo:
        return 0.0
    edges = [lo]
    edges.extend(b for b in W.breakpoints(lo, hi))
    edges.append(hi)
    edges = np.unique(np.asarray(edges))
    f = lambda s: W._eval_array(np.asarray(s)) * np.asarray(s) ** q
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        npan = max(1, int(math.ceil(4.0 * math.log(b / a) / math.log(2.0))))
        sub = np.geomspace(a, b, npan + 1) if a > 0 else np.linspace(a, b, npan + 1)
        val = sum(_gauss_panel(f, x, y) for x, y in zip(sub[:-1], sub[1:]))
        # one refinement step as a cheap error estimate
        sub2 = np.geomspace(a, b, 2 * npan + 1)
        val2 = sum(_gauss_panel(f, x, y) for x, y in zip(sub2[:-1], sub2[1:]))
        if abs(val2 - val) > rtol * (abs(val2) + 1e-300):
            sub4 = np.geomspace(a, b, 8 * npan + 1)
            val2 = sum(_gauss_panel(f, x, y) for x, y in zip(sub4[:-1], sub4[1:]))
        total += val2
    return total


# -- hypothesis report --------------------------------------------------


@dataclass
class HypothesisReport:
    weight: str
    admissible: dict | None = None
    H: dict | None = None
    W_check: dict | None = None
    decay: dict | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def check_admissible(W: RadialWeight, params: Params, R_quad: float = 1e4) -> dict:
    """int_1^inf K s^{p-1} ds: truncated value plus analytic tail bound."""
    if params.p == params.N:
        raise ValueError("the p = N branch is not implemented")
    q = params.p - 1.0
    head = integrate_weighted(W, q, 1.0, R_quad)
    tail = W.tail_integral_bound(R_quad, q)
    ok = math.isfinite(head + tail)
    return {"integral_truncated": head, "tail_bound": tail,
            "R_quad": R_quad, "pass": bool(ok)}


def check_H(W: RadialWeight, params: Params, delta: float,
            R_quad: float = 1e4) -> dict:
    """(H): K in L^inf and int_1^inf K s^delta ds < inf for delta in (p-1, N-1)."""
    if not (params.p - 1.0 < delta < params.N - 1.0):
        raise ValueError(f"delta must lie in (p-1, N-1) = "
                         f"({params.p - 1.0}, {params.N - 1.0})")
    head = integrate_weighted(W, delta, 1.0, R_quad)
    tail = W.tail_integral_bound(R_quad, delta)
    r_samp = np.geomspace(1.0 + 1e-9, R_quad, 20001)
    sup = float(np.max(W.eval(r_samp)))
    c, a = W.tail_majorant()
    sup_tail = c * R_quad ** (-a)
    bounded = math.isfinite(max(sup, sup_tail))
    ok = math.isfinite(head + tail) and bounded
    return {"delta": delta, "integral_truncated": head, "tail_bound": tail,
            "sup_sampled": max(sup, sup_tail), "pass": bool(ok)}


def decay_sup(W: RadialWeight, rhos=(10.0, 1e2, 1e3)) -> dict:
    """ess sup_{r >= rho} r^p K(r), sampled plus analytic plateau values."""
    p = W.p if W.kind in ("k1", "k2", "k3") else None
    sups = []
    for rho in rhos:
        r = np.geomspace(rho, rho * 1e3, 200001)
        pexp = p if p is not None else (W.alpha if W.kind == "power" else 4.0)
        v = float(np.max(W.eval(r) * r ** pexp))
        # the sampled sup can miss the narrow plateaus; add them analytically
        if W.kind in ("k1", "k3"):
            v = max(v, 1.0 / (1.0 + math.log(rho)))
        elif W.kind == "k2":
            v = 1.0  # plateau value r^{-p}: r^p K = 1 on every plateau
        sups.append(v)
    limit_zero = sups[-1] < 0.5 * sups[0] or sups[-1] < 1e-6
    return {"rho": list(rhos), "sup": sups, "limit_zero": bool(limit_zero)}


def _local_exponent_at(W: RadialWeight, t: float) -> float:
    """beta with K(r) ~ c |r-t|^beta near r=t (0 unless t is a zero of K)."""
    for z, beta in W.zeros():
        if abs(t - z) < 1e-12:
            return beta
    return 0.0


def check_W(W: RadialWeight, p: float, lo: float = 1.0, hi: float = 20.0,
            n_t: int = 25) -> dict:
    """(W): K^{-1} in L^1_loc and f(r)=|int_t^r K|^{(2-p)/(p-1)} in L^1_loc.

    The singular factor near r = t behaves like |r-t|^{(beta+1)e} with
    e = (2-p)/(p-1) and beta the local power of K at t; it is integrable iff
    (beta+1)e > -1.  That criterion is applied analytically at each lattice
    point (and at the zeros of K); away from the singularity the integral is
    evaluated numerically.
    """
    if p <= 2.0:
        return {"pass": True, "note": "e=(2-p)/(p-1) >= 0: no singularity"}
    e = (2.0 - p) / (p - 1.0)  # in (-1, 0) for p > 2
    t_vals = list(np.linspace(lo + 0.05, hi - 0.05, n_t))
    t_vals.extend(z for z, _ in W.zeros() if lo < z < hi)
    failures = []
    # K^{-1} local integrability: singular only at zeros of K
    kinv_ok = True
    for z, beta in W.zeros():
        if lo < z < hi and beta >= 1.0:
            kinv_ok = False
            failures.append({"t": z, "reason": f"K^-1 ~ |r-z|^-{beta}, beta >= 1"})
    f_ok = True
    for t in t_vals:
        beta = _local_exponent_at(W, t)
        if (beta + 1.0) * e <= -1.0:
            f_ok = False
            failures.append({"t": float(t),
                             "reason": f"(beta+1)(2-p)/(p-1) = {(beta + 1) * e:.3f} <= -1"})
    # spot numeric values away from the singularity for a few t
    samples = []
    for t in t_vals[:: max(1, len(t_vals) // 5)]:
        w = 0.25
        r = np.linspace(t + 1e-4, min(t + w, hi), 2001)
        F = np.array([integrate_weighted(W, 0.0, t, float(x), rtol=1e-7) for x in r[::200]])
        samples.append({"t": float(t), "f_spot": float(np.mean(np.abs(F) ** e))})
    return {"pass": bool(kinv_ok and f_ok), "kinv_ok": bool(kinv_ok),
            "f_ok": bool(f_ok), "failures": failures, "spot_values": samples}


def full_report(W: RadialWeight, params: Params, delta: float | None = None,
                R_quad: float = 1e4) -> HypothesisReport:
    if delta is None:
        delta = 0.5 * ((params.p - 1.0) + (params.N - 1.0))
    rep = HypothesisReport(weight=W.kind)
    rep.admissible = check_admissible(W, params, R_quad)
    rep.H = check_H(W, params, delta, R_quad)
    rep.decay = decay_sup(W)
    rep.W_check = check_W(W, params.p)
    return rep

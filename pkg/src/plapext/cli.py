"""Experiment runner: configuration, reproducible artifacts, acceptance suite.

Commands
--------
eig              first eigenpair of the radial problem
check-weight     hypothesis report for a weight
poincare         pencil eigenvalues and the improved Poincare constant
spectrum         leading generalized eigenpairs of the linearization pencil
reduced-profile  CSV sweep of the reduced energy profile j(tau; h)
solve            regime-dispatched solution report for a forcing h
approx-y         plateau-class approximation of the ground state
accept           full acceptance suite (exit 0 iff all criteria pass)

Configuration is a flat ``key = value`` text file (``--config``); command-line
flags override file values.  Every run writes a ``manifest.json`` (canonical
config echo, package versions, seed, wall time) and artifacts that embed the
manifest hash, computed over the deterministic fields only so that identical
configurations produce byte-identical artifacts.

Exit codes: 0 success, 1 numerical non-convergence, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, accept
from . import cutoff as ct
from . import quadform as qf
from . import variational as vr
from .core import Params, build_grid
from .eigensolver import asymptotic_constants, find_lambda1
from .weights import full_report, make_weight

SCHEMA = 1

_DEFAULTS = {
    "weight": "linear_r4",
    "p": 2.0,
    "N": 3,
    "r_end": 200.0,
    "R_max": 60.0,
    "M": 512,
    "tol": 1e-11,
    "h": "",
    "tau_min": -8.0,
    "tau_max": 8.0,
    "tau_n": 41,
    "eps": 0.1,
    "k": 6,
    "seed": 0,
    "out": "runs",
}

_CASTS = {"p": float, "N": int, "r_end": float, "R_max": float, "M": int,
          "tol": float, "tau_min": float, "tau_max": float, "tau_n": int,
          "eps": float, "k": int, "seed": int}


class UsageError(Exception):
    pass


def _read_config(path: str | None) -> dict:
    cfg = {}
    if path:
        text = Path(path).read_text()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k] = v
    return cfg


def _resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    for k, v in _read_config(args.config).items():
        if k not in _DEFAULTS:
            raise UsageError(f"unknown config key {k!r}")
        cfg[k] = v
    for k in _DEFAULTS:
        flag = getattr(args, k, None)
        if flag is not None:
            cfg[k] = flag
    for k, cast in _CASTS.items():
        cfg[k] = cast(cfg[k])
    return cfg


def _canonical(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def _manifest(cfg: dict) -> tuple[dict, str]:
    # the output location is bookkeeping, not part of the experiment
    stable = {
        "schema": SCHEMA,
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "versions": {"plapext": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__,
                     "python": sys.version.split()[0]},
        "seed": cfg["seed"],
    }
    digest = hashlib.sha256(_canonical(stable).encode()).hexdigest()[:16]
    return stable, digest


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                               default=float) + "\n")


def _write_csv(path: Path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(x)) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _out_dir(cfg: dict, command: str) -> Path:
    out = Path(cfg["out"]) / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _make_h(ctx, spec: str):
    """Forcing from a spec like 'bump?center=3&width=0.5&orthogonalize=true'
    or 'kphi?xi=0.01' (tilt of the orthogonalized default bump)."""
    from urllib.parse import parse_qs
    if not spec:
        return None
    kind, qs = (spec.split("?", 1) + [""])[:2]
    kv = {k: v[0] for k, v in parse_qs(qs).items()}
    kind = kind.strip().lower()
    if kind == "bump":
        center = float(kv.get("center", 3.0))
        width = float(kv.get("width", 0.5))
        amp = float(kv.get("amp", 1.0))
        if kv.get("orthogonalize", "false").lower() in ("true", "1", "yes"):
            return vr.orthogonalized_bump(ctx, center, width, amp)
        return vr.bump_density(ctx.grid, center, width, amp)
    if kind == "kphi":
        xi = float(kv.get("xi", 0.01))
        base = vr.orthogonalized_bump(ctx, float(kv.get("center", 3.0)),
                                      float(kv.get("width", 0.5)))
        return vr.kphi_density(ctx, xi, base=base)
    raise UsageError(f"unknown forcing spec {spec!r}")


# -- commands -------------------------------------------------------------


def _cmd_eig(cfg: dict, out: Path, digest: str) -> int:
    eig = find_lambda1(make_weight(cfg["weight"]),
                       Params(p=cfg["p"], N=cfg["N"]),
                       tol=cfg["tol"], r_end=cfg["r_end"])
    C, D = asymptotic_constants(eig)
    _write_json(out / "eig.json", {
        "schema": SCHEMA, "manifest": digest,
        "lambda1": eig.lambda1, "r0": eig.r0, "C": C, "D": D,
        "D_over_C": D / C, "norm_value": eig.norm_value,
        "r_end": eig.r_end})
    return 0


def _cmd_check_weight(cfg: dict, out: Path, digest: str) -> int:
    rep = full_report(make_weight(cfg["weight"]),
                      Params(p=cfg["p"], N=cfg["N"]))
    payload = rep.to_dict()
    payload.update({"schema": SCHEMA, "manifest": digest})
    _write_json(out / "weight.json", payload)
    return 0


def _pencil(cfg: dict):
    params = Params(p=cfg["p"], N=cfg["N"])
    eig = find_lambda1(make_weight(cfg["weight"]), params,
                       tol=cfg["tol"], r_end=cfg["r_end"])
    grid = build_grid(cfg["R_max"], cfg["M"], N=cfg["N"])
    forms = qf.assemble_discrete(eig, eig.weight, grid, params)
    return params, eig, grid, forms


def _cmd_poincare(cfg: dict, out: Path, digest: str) -> int:
    params, eig, _, forms = _pencil(cfg)
    mu1, mu2, gap = qf.simplicity_gap(forms)
    const = qf.poincare_constant(forms, eig, params, seed=cfg["seed"])
    _write_json(out / "poincare.json", {
        "schema": SCHEMA, "manifest": digest,
        "mu1": mu1, "mu2": mu2, "gap": gap, "poincare_constant": const})
    return 0


def _cmd_spectrum(cfg: dict, out: Path, digest: str) -> int:
    _, _, grid, forms = _pencil(cfg)
    mu, X = qf.generalized_eigs(forms, cfg["k"])
    _write_json(out / "spectrum.json", {
        "schema": SCHEMA, "manifest": digest, "mu": list(map(float, mu))})
    rows = np.column_stack([grid.nodes[1:], X])
    _write_csv(out / "spectrum.csv",
               ["r"] + [f"x{i + 1}" for i in range(X.shape[1])], rows)
    return 0


def _context(cfg: dict):
    params = Params(p=cfg["p"], N=cfg["N"])
    eig = find_lambda1(make_weight(cfg["weight"]), params,
                       tol=cfg["tol"], r_end=cfg["r_end"])
    grid = build_grid(cfg["R_max"], cfg["M"], N=cfg["N"])
    ctx0 = vr.make_context(eig, grid)
    h = _make_h(ctx0, cfg["h"])
    return vr.with_forcing(ctx0, h) if h is not None else ctx0


def _cmd_reduced_profile(cfg: dict, out: Path, digest: str) -> int:
    ctx = _context(cfg)
    taus = np.linspace(cfg["tau_min"], cfg["tau_max"], cfg["tau_n"])
    prof = vr.reduced_profile(ctx, taus, refine=False)
    from .core import x_norm_values
    rows = []
    for tau, j, up in zip(prof.tau_grid, prof.j_values, prof.minimizers):
        rows.append((tau, j, x_norm_values(up.values, ctx.grid, ctx.params)))
    _write_csv(out / "profile.csv", ["tau", "j", "uperp_norm"], rows)
    _write_json(out / "profile.json", {
        "schema": SCHEMA, "manifest": digest, "trend": prof.trend,
        "local_maxima": prof.local_maxima, "local_minima": prof.local_minima})
    return 0


def _cmd_solve(cfg: dict, out: Path, digest: str) -> int:
    ctx = _context(cfg)
    rep = vr.solve_resonant(ctx)
    payload = {
        "schema": SCHEMA, "manifest": digest, "regime": rep.regime,
        "pairing_value": rep.pairing_value, "verdict": rep.verdict,
        "details": rep.details,
        "solutions": [{"kind": kind, "residual": resid,
                       "csv": f"solution_{i}.csv"}
                      for i, (_, resid, kind) in enumerate(rep.solutions)],
    }
    _write_json(out / "solve.json", payload)
    for i, (u, _, _) in enumerate(rep.solutions):
        _write_csv(out / f"solution_{i}.csv", ["r", "u"],
                   np.column_stack([ctx.grid.nodes, u.values]))
    return 0


def _cmd_approx_y(cfg: dict, out: Path, digest: str) -> int:
    params = Params(p=cfg["p"], N=cfg["N"])
    eig = find_lambda1(make_weight(cfg["weight"]), params,
                       tol=cfg["tol"], r_end=cfg["r_end"])
    w, achieved = ct.approximate_in_Y(eig, cfg["eps"])
    rs = np.linspace(1.0, w.breaks[-1], 2001)
    _write_csv(out / "w_eps.csv", ["r", "w"],
               [(r, w.value(r)) for r in rs])
    _write_json(out / "approx_y.json", {
        "schema": SCHEMA, "manifest": digest,
        "n1": w.meta.get("n1"), "n2": w.meta.get("n2"),
        "n3": w.meta.get("n3"), "delta": w.meta.get("delta"),
        "achieved": achieved, "eps": cfg["eps"]})
    return 0


def _cmd_accept(cfg: dict, out: Path, digest: str) -> int:
    results = accept.run_all()
    for r in results:
        print(r.line())
    payload = {
        "schema": SCHEMA, "manifest": digest,
        "criteria": [{"number": r.number, "name": r.name,
                      "passed": r.passed, "elapsed": r.elapsed,
                      "details": r.details} for r in results],
        "all_passed": all(r.passed for r in results),
    }
    _write_json(out / "accept.json", payload)
    return 0 if payload["all_passed"] else 1


_COMMANDS = {
    "eig": _cmd_eig,
    "check-weight": _cmd_check_weight,
    "poincare": _cmd_poincare,
    "spectrum": _cmd_spectrum,
    "reduced-profile": _cmd_reduced_profile,
    "solve": _cmd_solve,
    "approx-y": _cmd_approx_y,
    "accept": _cmd_accept,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plapext", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        sp.add_argument("--weight", default=None)
        sp.add_argument("--p", type=float, default=None)
        sp.add_argument("--N", type=int, default=None)
        sp.add_argument("--r-end", dest="r_end", type=float, default=None)
        sp.add_argument("--R-max", dest="R_max", type=float, default=None)
        sp.add_argument("--M", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--h", default=None)
        sp.add_argument("--tau-min", dest="tau_min", type=float, default=None)
        sp.add_argument("--tau-max", dest="tau_max", type=float, default=None)
        sp.add_argument("--tau-n", dest="tau_n", type=int, default=None)
        sp.add_argument("--eps", type=float, default=None)
        sp.add_argument("--k", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = _resolve_config(args)
        manifest, digest = _manifest(cfg)
        out = _out_dir(cfg, args.command)
        code = _COMMANDS[args.command](cfg, out, digest)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 1
    manifest["wall_time_s"] = time.perf_counter() - t0
    manifest["hash"] = digest
    _write_json(out / "manifest.json", manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""``conicheat`` command line: eval, verify, lemma, selftest.

Exit codes: 0 when every check passes, 1 on a tolerance failure, 2 on a
usage or configuration error.
"""
import argparse
import json
import math
import sys
import time

from ..errors import ConicHeatError, UnsupportedError
from ..geometry import DomainPoint, Kind, check_point, invariants_of
from ..kernels import EvalConfig, KernelParams, STRATEGIES, evaluate_invariants
from .config import ConfigError, load_config
from .lemmas import LEMMAS, run_lemma_checks, write_rows
from .report import emit
from .sweep import run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

EVAL_KEYS = ("kind", "parity", "gamma", "mu", "rho", "tau", "strategy")
EVAL_CFG_KEYS = ("tail_tol", "n_max", "include_n0", "quad_nodes", "min_exponent_guard", "roundoff_guard")


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _read_json(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _num_or_null(v):
    return v if isinstance(v, (int, str)) or (isinstance(v, float) and math.isfinite(v)) else None


# ---- eval ----


def _eval_settings(args):
    base = _read_json(args.config) if args.config else {}
    unknown = set(base) - set(EVAL_KEYS) - set(EVAL_CFG_KEYS)
    if unknown:
        raise ConfigError(f"unknown eval config keys: {sorted(unknown)}")
    for k in EVAL_KEYS:
        v = getattr(args, k)
        if v is not None:
            base[k] = v
    base.setdefault("kind", "ConeSurface")
    base.setdefault("parity", "even")
    base.setdefault("strategy", "integral")
    ecfg = EvalConfig(**{k: base[k] for k in EVAL_CFG_KEYS if k in base})
    return base, ecfg


def _point(spec, kind, rho):
    if isinstance(spec, dict):
        spec = {"kind": kind, "rho": rho, **spec}
        return check_point(DomainPoint.from_dict(spec))
    raise ConfigError(f"point must be a JSON object with 'x' and 't', got {spec!r}")


def _eval_one(settings, ecfg, p_spec, q_spec):
    s = dict(settings)
    if "tau" not in s:
        raise ConfigError("tau is required")
    try:
        kind = Kind(s["kind"])
    except ValueError:
        raise ConfigError(f"unknown kind {s['kind']!r}") from None
    rho = float(s.get("rho", 0.0)) if kind.is_hyper else 0.0
    if not isinstance(p_spec, dict) or "x" not in p_spec:
        raise ConfigError(f"point must be a JSON object with 'x' and 't', got {p_spec!r}")
    # refuse unavailable cells before looking at the points
    params = KernelParams(kind, s["parity"], len(p_spec["x"]), s.get("gamma", 0.0), s.get("mu", 0.0), rho)
    p = _point(p_spec, kind.value, rho)
    q = _point(q_spec, kind.value, rho)
    if q.d != p.d:
        raise ConfigError(f"points have different dimensions {p.d} and {q.d}")
    if s["strategy"] not in STRATEGIES:
        raise ConfigError(f"unknown strategy {s['strategy']!r}")
    inv = invariants_of(p, q)
    ev = evaluate_invariants(params, float(s["tau"]), inv.i1, inv.i2, inv.i3, inv.st, ecfg, s["strategy"])
    value = float(ev.values[0])
    ok = bool(ev.ok[0])
    log_k = math.log(abs(value)) if ok and value != 0 else math.nan
    log_env = float(ev.log_envelope[0])
    return {
        **params.to_dict(),
        "tau": float(s["tau"]),
        "i1": inv.i1, "i2": inv.i2, "i3": inv.i3, "st": inv.st,
        "psi": float(ev.psi[0]),
        "status": str(ev.status[0]),
        "kernel": value if ok or ev.status[0] == "zero" else None,
        "log_kernel": _num_or_null(log_k),
        "log_envelope": _num_or_null(log_env),
        "log_ratio": _num_or_null(log_k - log_env),
        "n_terms": ev.n_terms,
    }


def cmd_eval(args):
    settings, ecfg = _eval_settings(args)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        if args.batch:
            with open(args.batch) as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        rec = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise ConfigError(f"{args.batch}:{lineno}: invalid JSON: {exc}") from None
                    extra = {k: rec[k] for k in EVAL_KEYS if k in rec}
                    res = _eval_one({**settings, **extra}, ecfg, rec.get("p"), rec.get("q"))
                    out.write(json.dumps(res, allow_nan=False) + "\n")
        else:
            if args.x is None or args.t is None:
                raise ConfigError("eval needs --x and --t (and optionally --y/--s), or --batch")
            p = {"x": args.x, "t": args.t}
            q = {"x": args.y if args.y is not None else args.x, "t": args.s if args.s is not None else args.t}
            out.write(json.dumps(_eval_one(settings, ecfg, p, q), allow_nan=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---- verify ----

_VERIFY_FLAGS = {
    "kind": "kind", "parity": "parity", "d": "d", "gamma": "gamma", "mu": "mu", "rho": "rho",
    "tau_min": "tau_min", "tau_max": "tau_max", "n_tau": "n_tau", "pairs": "pairs", "seed": "seed",
    "guard": "min_exponent_guard", "roundoff_guard": "roundoff_guard", "drift_tol": "drift_tol",
    "workers": "workers", "csv": "csv_path", "json": "json_path",
}


def _drift(v):
    return f"{v:+.4f}" if math.isfinite(v) else "n/a"


def cmd_verify(args):
    overrides = {dst: getattr(args, src) for src, dst in _VERIFY_FLAGS.items()}
    cfg = load_config(args.config, overrides)
    t0 = time.perf_counter()
    report = run_verify(cfg)
    elapsed = time.perf_counter() - t0
    if cfg.csv_path:
        emit(report, "csv", cfg.csv_path)
    if cfg.json_path:
        emit(report, "json", cfg.json_path)
    for c in report.cells:
        p = c.params
        print(
            f"{p['kind']:<13} {p['parity']:<4} d={p['d']} gamma={p['gamma']:g} mu={p['mu']:g} rho={p['rho']:g}: "
            f"log-window [{c.log_min:.4f}, {c.log_max:.4f}] drift {_drift(c.drift)} "
            f"excluded {c.n_excluded}/{c.n_total}"
            + (
                f" transport {c.transport_max_rel:.2e} over {c.transport_compared} noise {c.transport_noise_ratio:.2g}"
                if c.transport_max_rel is not None
                else ""
            )
        )
    s = report.summary()
    print(
        f"window [{report.r_min:.6g}, {report.r_max:.6g}] max|drift| {_drift(s['max_abs_drift'])} "
        f"included {s['n_included']} excluded {s['n_excluded']} ({elapsed:.1f}s)"
    )
    for name, ok in s["checks"].items():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return EXIT_OK if report.passed else EXIT_FAIL


# ---- lemma / selftest ----


def cmd_lemma(args):
    grid = json.loads(args.grid) if args.grid else None
    if grid is not None and not isinstance(grid, dict):
        raise ConfigError("--grid must be a JSON object of keyword overrides")
    try:
        res = run_lemma_checks(args.which, grid)
    except TypeError as exc:
        raise ConfigError(f"bad grid for {args.which}: {exc}") from None
    print(res.line())
    if args.csv:
        write_rows(res, args.csv)
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_selftest(args):
    from .selftest import run_selftest

    results = run_selftest(quick=args.quick)
    for line, _ in results:
        print(line)
    return EXIT_OK if all(ok for _, ok in results) else EXIT_FAIL


def build_parser():
    ap = argparse.ArgumentParser(prog="conicheat", description="Jacobi heat kernels on cones and hyperboloids")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate the heat kernel for one pair or a JSON-lines batch")
    e.add_argument("--config", help="JSON file with kernel/eval settings")
    e.add_argument("--kind")
    e.add_argument("--parity", choices=("even", "odd"))
    e.add_argument("--gamma", type=float)
    e.add_argument("--mu", type=float)
    e.add_argument("--rho", type=float)
    e.add_argument("--tau", type=float)
    e.add_argument("--strategy", choices=sorted(STRATEGIES))
    e.add_argument("--x", type=_floats, help="first point, comma-separated")
    e.add_argument("--t", type=float)
    e.add_argument("--y", type=_floats, help="second point (defaults to the first)")
    e.add_argument("--s", type=float)
    e.add_argument("--batch", help="JSON-lines file of {p, q, ...} records")
    e.add_argument("--output", help="write JSON lines here instead of stdout")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="random sweep of kernel/envelope ratios")
    v.add_argument("--config", help="JSON sweep config")
    v.add_argument("--kind")
    v.add_argument("--parity", choices=("even", "odd"))
    v.add_argument("--d", type=int, nargs="+")
    v.add_argument("--gamma", type=float, nargs="+")
    v.add_argument("--mu", type=float, nargs="+")
    v.add_argument("--rho", type=float, nargs="+")
    v.add_argument("--tau-min", type=float)
    v.add_argument("--tau-max", type=float)
    v.add_argument("--n-tau", type=int)
    v.add_argument("--pairs", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--guard", type=float, help="log underflow guard")
    v.add_argument("--roundoff-guard", type=float)
    v.add_argument("--drift-tol", type=float)
    v.add_argument("--workers", type=int)
    v.add_argument("--csv", help="CSV output path")
    v.add_argument("--json", help="JSON output path")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("lemma", help="run one auxiliary property suite")
    m.add_argument("which", choices=LEMMAS)
    m.add_argument("--grid", help="JSON object of keyword overrides")
    m.add_argument("--csv", help="CSV output path")
    m.set_defaults(func=cmd_lemma)

    s = sub.add_parser("selftest", help="run every property suite")
    s.add_argument("--quick", action="store_true", help="smaller sweeps")
    s.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedError as exc:
        print(f"conicheat: refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConicHeatError, OSError, json.JSONDecodeError) as exc:
        print(f"conicheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

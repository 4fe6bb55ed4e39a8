"""Random sweeps certifying kernel/envelope comparability.

Every sampled point gets its own RNG stream keyed by ``(cell, pair, side)``,
so the sample set does not depend on how the work is split across
processes. Tasks are ``(cell, tau)`` blocks and results are merged in task
order.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import NamedTuple

import numpy as np

from ..geometry import invariants_arrays, sample_random, to_cone
from ..kernels import evaluate_invariants
from .config import SweepConfig, sweep_config_from_dict, worker_cap

COLUMNS = (
    "kind", "parity", "d", "gamma", "mu", "rho", "tau", "i1", "i2", "i3",
    "psi", "log_kernel", "log_envelope", "log_ratio", "excluded_flag",
)


class SweepRow(NamedTuple):
    kind: str
    parity: str
    d: int
    gamma: float
    mu: float
    rho: float
    tau: float
    i1: float
    i2: float
    i3: float
    psi: float
    log_kernel: float
    log_envelope: float
    log_ratio: float
    excluded_flag: int


@dataclass
class CellSummary:
    params: dict
    n_total: int
    n_excluded: int
    log_min: float = math.nan
    log_max: float = math.nan
    argmin: dict = None
    argmax: dict = None
    drift: float = math.nan
    sign_mismatch: int = 0
    transport_max_rel: float = None
    transport_compared: int = 0
    transport_noise_ratio: float = None
    profile: list = field(default_factory=list)

    @property
    def n_included(self):
        return self.n_total - self.n_excluded

    @property
    def window_finite(self):
        return self.n_included > 0 and math.isfinite(self.log_min) and math.isfinite(self.log_max)


@dataclass
class RatioReport:
    config: dict
    cells: list
    rows: list

    @property
    def n_total(self):
        return sum(c.n_total for c in self.cells)

    @property
    def n_excluded(self):
        return sum(c.n_excluded for c in self.cells)

    @property
    def n_included(self):
        return self.n_total - self.n_excluded

    @property
    def log_r_min(self):
        vals = [c.log_min for c in self.cells if c.n_included]
        return min(vals) if vals else math.nan

    @property
    def log_r_max(self):
        vals = [c.log_max for c in self.cells if c.n_included]
        return max(vals) if vals else math.nan

    @property
    def r_min(self):
        return math.exp(self.log_r_min)

    @property
    def r_max(self):
        return math.exp(self.log_r_max)

    @property
    def max_abs_drift(self):
        vals = [abs(c.drift) for c in self.cells if math.isfinite(c.drift)]
        return max(vals) if vals else math.nan

    @property
    def max_transport_rel(self):
        vals = [c.transport_max_rel for c in self.cells if c.transport_max_rel is not None]
        return max(vals) if vals else None

    @property
    def max_transport_noise_ratio(self):
        vals = [c.transport_noise_ratio for c in self.cells if c.transport_noise_ratio is not None]
        return max(vals) if vals else None

    def checks(self):
        """Named pass/fail results for the comparability criteria."""
        cfg = self.config
        out = {
            "window_finite": bool(self.cells) and all(c.window_finite for c in self.cells),
            "sign_agreement": all(c.sign_mismatch == 0 for c in self.cells),
        }
        drifts = [c.drift for c in self.cells]
        if cfg.get("n_tau", 2) > 1:
            out["drift"] = all(math.isfinite(v) and abs(v) <= cfg["drift_tol"] for v in drifts)
        t = self.max_transport_rel
        if t is not None:
            out["transport"] = t <= cfg["transport_tol"] and self.max_transport_noise_ratio <= 1.0
        return out

    @property
    def passed(self):
        return all(self.checks().values())

    def summary(self):
        return {
            "n_total": self.n_total,
            "n_included": self.n_included,
            "n_excluded": self.n_excluded,
            "log_r_min": self.log_r_min,
            "log_r_max": self.log_r_max,
            "max_abs_drift": self.max_abs_drift,
            "max_transport_rel": self.max_transport_rel,
            "max_transport_noise_ratio": self.max_transport_noise_ratio,
            "checks": self.checks(),
            "passed": self.passed,
        }


@lru_cache(maxsize=64)
def _cell_pairs(seed, cell, kind, d, rho, n_pairs):
    pairs = []
    for j in range(n_pairs):
        p, q = (
            sample_random(kind, d, rho, np.random.SeedSequence(seed, spawn_key=(cell, j, side)))
            for side in (0, 1)
        )
        pairs.append((p, q))
    return tuple(pairs)


def sample_cell_pairs(cfg, cell):
    params = cfg.cells()[cell]
    return _cell_pairs(cfg.seed, cell, params.kind, params.d, params.rho, cfg.pairs)


def compare_transport(a, b, tol):
    """Compare two evaluations of the same kernel reached by different rounding paths.

    Returns ``(max_rel, n_compared, noise_ratio)``. ``max_rel`` is taken over
    points whose own rounding estimate is within ``tol`` in both evaluations,
    since a value good to 1e-10 cannot be compared at 1e-12. ``noise_ratio``
    is ``max |a - b| / (floor_a + floor_b)`` over every point resolved by
    both and must stay <= 1.
    """
    both = a.ok & b.ok
    if not both.any():
        return 0.0, 0, 0.0
    diff = np.abs(a.values[both] - b.values[both])
    noise = float(np.max(diff / (a.floors[both] + b.floors[both])))
    ref = np.abs(b.values[both])
    sharp = (a.floors[both] <= tol * np.abs(a.values[both])) & (b.floors[both] <= tol * ref)
    rel = float(np.max(diff[sharp] / ref[sharp])) if sharp.any() else 0.0
    return rel, int(sharp.sum()), noise


def _finite_or_nan(a):
    return np.where(np.isfinite(a), a, np.nan)


def _run_task(cfg, cell, ti):
    params = cfg.cells()[cell]
    tau = cfg.taus[ti]
    ecfg = cfg.eval_config
    pairs = sample_cell_pairs(cfg, cell)
    i1, i2, i3, st = invariants_arrays(pairs)
    ev = evaluate_invariants(params, tau, i1, i2, i3, st, ecfg)
    ok = ev.ok
    with np.errstate(divide="ignore", invalid="ignore"):
        log_k = np.log(np.abs(ev.values))
    log_env = ev.log_envelope
    env_sign = np.sign(st) if params.parity == "odd" else np.ones_like(st)
    mismatch = int(np.sum(ok & (np.sign(ev.values) != env_sign)))
    log_k = np.where(ok, log_k, np.nan)
    log_ratio = log_k - log_env

    transport = None
    if params.kind.is_hyper:
        cone_pairs = [(to_cone(p), to_cone(q)) for p, q in pairs]
        c1, c2, c3, cst = invariants_arrays(cone_pairs)
        cev = evaluate_invariants(params.cone_params, tau, c1, c2, c3, cst, ecfg)
        transport = compare_transport(ev, cev, cfg.transport_tol)

    head = params.to_dict()
    rows = [
        SweepRow(
            head["kind"], head["parity"], head["d"], head["gamma"], head["mu"], head["rho"], tau,
            float(a), float(b), float(c), float(s), float(k), float(e), float(r), int(not o),
        )
        for a, b, c, s, k, e, r, o in zip(
            i1, i2, i3, ev.psi, log_k, _finite_or_nan(log_env), log_ratio, ok
        )
    ]
    return cell, ti, rows, mismatch, transport


def _task_entry(args):
    cfg_dict, cell, ti = args
    return _run_task(sweep_config_from_dict(cfg_dict), cell, ti)


def _summarize(params, cell_rows, mismatch):
    n_total = len(cell_rows)
    inc = [(j, r) for j, r in enumerate(cell_rows) if not r.excluded_flag]
    summary = CellSummary(params.to_dict(), n_total, n_total - len(inc), sign_mismatch=mismatch)
    if not inc:
        return summary
    lr = np.array([r.log_ratio for _, r in inc])
    lt = np.log([r.tau for _, r in inc])
    lo, hi = int(np.argmin(lr)), int(np.argmax(lr))
    summary.log_min, summary.log_max = float(lr[lo]), float(lr[hi])
    summary.argmin = _describe(*inc[lo])
    summary.argmax = _describe(*inc[hi])
    if np.unique(lt).size > 1:
        summary.drift = float(np.polyfit(lt, lr, 1)[0])
    for tau in sorted({r.tau for _, r in inc}):
        sel = lr[np.array([r.tau == tau for _, r in inc])]
        summary.profile.append([tau, int(sel.size), float(sel.mean())])
    return summary


def _describe(index, row):
    out = row._asdict()
    out["row"] = index
    return out


def run_verify(cfg: SweepConfig, workers=None):
    """Sweep every cell of ``cfg`` over its tau grid; returns a :class:`RatioReport`.

    The kernel is evaluated with the integral-of-G strategy. ``workers``
    defaults to ``cfg.workers``; either way it is capped by
    ``$CONICHEAT_THREADS``.
    """
    cells = cfg.cells()
    tasks = [(c, ti) for c in range(len(cells)) for ti in range(len(cfg.taus))]
    n_workers = worker_cap(cfg.workers if workers is None else workers)
    if n_workers == 1 or len(tasks) == 1:
        results = [_run_task(cfg, c, ti) for c, ti in tasks]
    else:
        payload = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_task_entry, [(payload, c, ti) for c, ti in tasks]))
    results.sort(key=lambda r: (r[0], r[1]))

    rows, summaries = [], []
    for c, params in enumerate(cells):
        mine = [r for r in results if r[0] == c]
        cell_rows = [row for r in mine for row in r[2]]
        mismatch = sum(r[3] for r in mine)
        summary = _summarize(params, cell_rows, mismatch)
        transports = [r[4] for r in mine if r[4] is not None]
        if transports:
            summary.transport_max_rel = max(t[0] for t in transports)
            summary.transport_compared = sum(t[1] for t in transports)
            summary.transport_noise_ratio = max(t[2] for t in transports)
        summaries.append(summary)
        rows.extend(cell_rows)
    return RatioReport(cfg.to_dict(), summaries, rows)

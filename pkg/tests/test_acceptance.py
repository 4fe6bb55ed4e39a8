"""Acceptance criteria, each at its stated tolerance and time budget."""
import math
import time

import numpy as np
import pytest

from conicheat import (
    DomainPoint,
    KernelParams,
    Kind,
    build_rule,
    evaluate_pairs,
    g_heat,
    get_basis,
    heat_kernel,
    sample_random,
)
from conicheat.harness import SweepConfig, run_verify
from conicheat.harness.lemmas import check_fubini, check_lnss1, check_range_xi
from conicheat.harness.report import csv_text
from conicheat.harness.selftest import theorem_sweeps

from oracles import g_series, pi_moment


def _timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t0


def test_1_quadrature_moments(acceptance_line):
    build_rule.cache_clear()
    etas = (-0.5, 0.0, 0.5, 1.0, 1.7, 3.0)
    refs = {(eta, k): float(pi_moment(eta, k)) for eta in etas for k in range(7)}

    def run():
        worst = 0.0
        for eta in etas:
            rule = build_rule(eta, 4)
            for k in range(7):
                got = rule.integrate(lambda z: z**k)
                ref = refs[eta, k]
                # odd moments vanish: measure them on the scale of the even ones
                err = abs(got - ref) / (abs(ref) if ref else 1.0)
                worst = max(worst, err)
        return worst

    worst, dt = _timed(run)
    ok = worst <= 1e-12 and dt < 1.0
    acceptance_line(1, ok, f"quadrature moments max rel err {worst:.2e} (tol 1e-12), {dt:.3f}s (< 1s)")
    assert ok


def test_2_z_normalization(acceptance_line):
    def run():
        worst = 0.0
        for lam in (0.0, 0.5, 1.0, 2.5):
            b = get_basis(lam)
            rule = build_rule(lam + 0.5, 13)
            z = np.array([b.zfun(n, rule.nodes) for n in range(13)])
            gram = (z * rule.weights) @ z.T
            z1 = b.z_at_one[:13]
            scale = np.sqrt(np.outer(z1, z1))
            worst = max(worst, float(np.max(np.abs(gram - np.diag(z1)) / scale)))
        return worst

    worst, dt = _timed(run)
    ok = worst <= 1e-10 and dt < 5.0
    acceptance_line(2, ok, f"Z_n orthogonality max rel err {worst:.2e} (tol 1e-10), {dt:.2f}s (< 5s)")
    assert ok


def test_3_fubini_strategy_equivalence(acceptance_line):
    res, dt = _timed(check_fubini)
    compared = sum(r["compared"] for r in res.rows)
    ok = res.passed and dt < 120
    acceptance_line(
        3, ok,
        f"integral vs series max rel diff {res.metrics['max_rel_diff']:.2e} (tol 1e-8) over {compared} "
        f"resolved evaluations in {len(res.rows) // 3} cells, {dt:.1f}s (< 120s)",
    )
    assert ok


def test_4_lnss1_sharpness(acceptance_line):
    res, dt = _timed(check_lnss1)
    windows = "; ".join(
        f"lam={r['lam']:g} [{math.exp(r['log_r_min']):.3g}, {math.exp(r['log_r_max']):.3g}]" for r in res.rows
    )
    ok = res.passed and dt < 60
    acceptance_line(
        4, ok,
        f"G/envelope windows {windows}; refinement move {res.metrics['max_endpoint_move']:.3g} (< 0.2), "
        f"{dt:.1f}s (< 60s)",
    )
    assert ok


def test_5_theorem_sharpness(acceptance_line):
    t0 = time.perf_counter()
    reports = [(cfg, run_verify(cfg)) for cfg in theorem_sweeps(pairs=200, n_tau=16)]
    dt = time.perf_counter() - t0
    parts, ok = [], dt < 600
    for cfg, rep in reports:
        checks = rep.checks()
        ok &= rep.passed
        failed = [k for k, v in checks.items() if not v]
        tr = rep.max_transport_rel
        parts.append(
            f"{cfg.kind}/{cfg.parity} window [{rep.r_min:.3g}, {rep.r_max:.3g}] max|slope| {rep.max_abs_drift:.3f}"
            + (f" transport {tr:.1e}" if tr is not None else "")
            + (f" FAILED {','.join(failed)}" if failed else "")
        )
    acceptance_line(5, ok, f"{dt:.0f}s (< 600s); " + "; ".join(parts))
    assert ok


ODD_CELLS = [
    KernelParams(Kind.CONE_SURFACE, "odd", 3, g) for g in (0.0, 0.5, 1.7)
] + [
    KernelParams(Kind.CONE_SOLID, "odd", d, g, mu) for d in (2, 3) for g in (0.0, 1.7) for mu in (0.0, 1.3)
]


def test_6_odd_structure(acceptance_line):
    worst_zero, worst_anti, checked = 0.0, 0.0, 0
    for c, params in enumerate(ODD_CELLS):
        apex = DomainPoint(params.kind, (0.0,) * params.d, 0.0)
        for j in range(20):
            p = sample_random(params.kind, params.d, 0.0, 1000 * c + j)
            q = sample_random(params.kind, params.d, 0.0, 1000 * c + j + 500)
            flipped = DomainPoint(p.kind, tuple(-v for v in p.x), -p.t)
            for tau in (0.05, 0.3, 1.0):
                ev = evaluate_pairs(params, tau, [(apex, q), (q, apex), (p, q), (flipped, q)])
                worst_zero = max(worst_zero, float(np.max(np.abs(ev.values[:2]))))
                if ev.ok[2] and ev.ok[3]:
                    a, b = ev.values[2], ev.values[3]
                    worst_anti = max(worst_anti, abs(a + b) / abs(a))
                    checked += 1
    ok = worst_zero <= 1e-15 and worst_anti <= 1e-10 and checked > 0
    acceptance_line(
        6, ok,
        f"odd kernels at st=0 max |K| {worst_zero:.1e} (tol 1e-15); flip antisymmetry max rel "
        f"{worst_anti:.1e} (tol 1e-10) over {checked} pairs",
    )
    assert ok


def test_7_range_xi(acceptance_line):
    res, dt = _timed(check_range_xi)
    ok = res.passed and res.metrics["samples"] >= 100_000 and dt < 10
    acceptance_line(
        7, ok,
        f"{res.metrics['samples']} samples max(|xi|-1) {res.metrics['max_abs_xi_minus_1']:.1e} (tol 1e-12), "
        f"{dt:.2f}s (< 10s)",
    )
    assert ok


def test_8_spot_values(acceptance_line):
    g = g_heat(1.0, 0.0, 1.0)
    g_ref = float(g_series(1.0, 0.0, 1.0))
    e1 = abs(g - g_ref) / g_ref

    # coincident surface point: gamma = 0 puts the v-measure on v = +-1, so xi in {I1 - I2, I1 + I2}
    p = DomainPoint(Kind.CONE_SURFACE, (0.6, 0.0), 0.6)
    params = KernelParams(Kind.CONE_SURFACE, "even", 2, 0.0)
    i1, i2 = 0.36, 0.64
    dirac = 0.5 * float(g_series(1.0, 0.0, i1 - i2) + g_series(1.0, 0.0, i1 + i2))
    k_int = heat_kernel(params, 1.0, p, p)
    k_ser = heat_kernel(params, 1.0, p, p, strategy="series")
    e2 = max(abs(k_int - dirac), abs(k_ser - dirac)) / dirac
    ok = e1 <= 1e-12 and e2 <= 1e-12
    acceptance_line(
        8, ok,
        f"G_1(1,1) = {g:.16g} vs direct sum {g_ref:.16g} (rel {e1:.1e}); coincident kernel {k_int:.16g} vs "
        f"Dirac reduction {dirac:.16g} (rel {e2:.1e}); tol 1e-12",
    )
    assert ok


def test_9_determinism(acceptance_line):
    cfg = SweepConfig(kind="HyperSolid", d=(2, 3), gamma=(0.0, 1.7), mu=(0.0, 1.3), rho=(0.5, 1.0),
                      pairs=40, n_tau=8)
    serial = csv_text(run_verify(cfg, workers=1).rows)
    parallel = csv_text(run_verify(cfg, workers=4).rows)
    again = csv_text(run_verify(cfg, workers=1).rows)
    ok = serial == parallel == again
    acceptance_line(
        9, ok,
        f"verify CSV byte-identical across serial/4-worker/repeat runs ({len(serial)} bytes, "
        f"{serial.count(chr(10)) - 1} rows)",
    )
    assert ok

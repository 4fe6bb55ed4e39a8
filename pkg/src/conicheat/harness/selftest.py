"""Every property suite in one run, plus the standard theorem sweeps."""
import math

import numpy as np

from ..geometry import DomainPoint, Kind
from ..kernels import KernelParams, g_heat, heat_kernel
from ..quadrature import build_rule
from .config import SweepConfig
from .lemmas import LEMMAS, run_lemma_checks
from .report import csv_text
from .sweep import run_verify

GAMMAS = (0.0, 0.5, 1.7)
MUS = (0.0, 1.3)
RHOS = (0.5, 1.0)


def theorem_sweeps(pairs=200, n_tau=16, seed=0, **kw):
    """Sweep configs over every available cell: even kernels on all four kinds, odd on the cones."""
    common = dict(gamma=GAMMAS, mu=MUS, rho=RHOS, pairs=pairs, n_tau=n_tau, seed=seed, **kw)
    return [
        SweepConfig(kind="ConeSurface", parity="even", d=(2, 3), **common),
        SweepConfig(kind="ConeSolid", parity="even", d=(2, 3), **common),
        SweepConfig(kind="HyperSurface", parity="even", d=(2, 3), **common),
        SweepConfig(kind="HyperSolid", parity="even", d=(2, 3), **common),
        # the odd surface weight needs d >= 3
        SweepConfig(kind="ConeSurface", parity="odd", d=(3,), **common),
        SweepConfig(kind="ConeSolid", parity="odd", d=(2, 3), **common),
    ]


def g_direct(tau, lam, w, terms=400):
    """Plain term-by-term sum of the one-dimensional heat series (spot-value oracle)."""
    from scipy.special import eval_jacobi, gammaln

    total = 0.0
    for n in range(terms):
        log_p1 = gammaln(n + lam + 1) - gammaln(lam + 1) - gammaln(n + 1)
        log_z1 = math.log((2 * n + 2 * lam + 1) / (2 * lam + 1)) + gammaln(n + 2 * lam + 1) - gammaln(
            n + 1
        ) - gammaln(2 * lam + 1)
        term = math.exp(-tau * n * (n + 2 * lam + 1) + log_z1 - log_p1) * eval_jacobi(n, lam, lam, w)
        total += term
    return total


def spot_values():
    """``(name, computed, reference)`` triples for the standard spot checks."""
    out = [("G_1^{0,0}(1,1)", g_heat(1.0, 0.0, 1.0), g_direct(1.0, 0.0, 1.0))]
    p = DomainPoint(Kind.CONE_SURFACE, (0.6, 0.0), 0.6)
    params = KernelParams(Kind.CONE_SURFACE, "even", 2, 0.0)
    rule = build_rule(-0.5, 1)
    # gamma = 0 collapses the v-integral onto v = +-1, i.e. xi in {1, I1 - I2}
    dirac = float(np.dot(rule.weights, [g_heat(1.0, 0.0, 0.36 - 0.64 * 1.0), g_heat(1.0, 0.0, 1.0)]))
    out.append(("coincident d=2 gamma=0 kernel", heat_kernel(params, 1.0, p, p), dirac))
    return out


def _determinism(cfg):
    a = csv_text(run_verify(cfg, workers=1).rows)
    b = csv_text(run_verify(cfg, workers=2).rows)
    c = csv_text(run_verify(cfg, workers=1).rows)
    return a == b == c


def run_selftest(quick=False):
    """Run everything; returns ``[(line, ok), ...]``."""
    results = []
    for name, got, ref in spot_values():
        err = abs(got - ref) / abs(ref)
        results.append((f"[{'PASS' if err <= 1e-12 else 'FAIL'}] spot {name}: {got:.16g} vs {ref:.16g}", err <= 1e-12))
    for which in LEMMAS:
        res = run_lemma_checks(which)
        results.append((res.line(), res.passed))
    pairs, n_tau = (20, 4) if quick else (200, 16)
    for cfg in theorem_sweeps(pairs=pairs, n_tau=n_tau):
        rep = run_verify(cfg)
        checks = rep.checks()
        brief = " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items())
        line = (
            f"[{'PASS' if rep.passed else 'FAIL'}] verify {cfg.kind} {cfg.parity}: "
            f"log-window [{rep.log_r_min:.3f}, {rep.log_r_max:.3f}] max|drift| {rep.max_abs_drift:.3f} {brief}"
        )
        results.append((line, rep.passed))
    det = _determinism(SweepConfig(pairs=10, n_tau=3))
    results.append((f"[{'PASS' if det else 'FAIL'}] verify determinism and worker equivalence", det))
    return results

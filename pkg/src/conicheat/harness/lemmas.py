"""Property suites for the auxiliary estimates behind the main theorems.

Each check returns a :class:`LemmaResult` with a pass flag, a few headline
metrics and tabular rows suitable for CSV output.
"""
import csv
from dataclasses import dataclass, field
import math

import numpy as np

from ..envelopes import lnss2_log_ratio, lnss3_lhs, lnss3_rhs, log_envelope_g
from ..errors import DomainError
from ..geometry import Kind, invariants_arrays, invariants_from_coords, sample_batch, to_cone
from ..kernels import (
    DEFAULT_CONFIG,
    KernelParams,
    evaluate_invariants,
    g_coefficients,
    g_heat,
    roundoff_floor,
)
from .sweep import _cell_pairs as draw_pairs, compare_transport

LEMMAS = ("lnss1", "lnss2", "lnss3", "range-xi", "fubini", "transport")


@dataclass
class LemmaResult:
    name: str
    passed: bool
    metrics: dict
    rows: list = field(default_factory=list)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        brief = ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items())
        return f"[{tag}] {self.name}: {brief}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def write_rows(result, path):
    rows = result.rows
    cols = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([format(r[c], ".17g") if isinstance(r[c], float) else r[c] for c in cols])


def _refine(n, factor):
    # nested refinement of an n-point grid with endpoints
    return factor * (n - 1) + 1


def _moved(base, fine):
    """Largest relative move of the ratio-scale window endpoints."""
    return max(abs(math.expm1(fine[0] - base[0])), abs(math.expm1(fine[1] - base[1])))


# ---- one-dimensional heat kernel envelope ----


def lnss1_window(lam, n_psi, n_tau, tau_lo=1e-3, cfg=DEFAULT_CONFIG):
    """Log-window of ``G / envelope`` over a ``psi x tau`` grid, skipping unresolved cells."""
    psi = np.linspace(0.0, np.pi, n_psi)
    w = np.clip(np.cos(psi), -1.0, 1.0)
    lo, hi, n_in, n_out = math.inf, -math.inf, 0, 0
    for tau in np.geomspace(tau_lo, 1.0, n_tau):
        g = g_heat(tau, lam, w, cfg)
        floor = roundoff_floor(g_coefficients(tau, lam, cfg))
        env = log_envelope_g(tau, lam, psi)
        good = (g > 0) & (floor <= cfg.roundoff_guard * g) & (env >= cfg.min_exponent_guard)
        n_in += int(good.sum())
        n_out += int((~good).sum())
        if good.any():
            lr = np.log(g[good]) - env[good]
            lo, hi = min(lo, float(lr.min())), max(hi, float(lr.max()))
    return lo, hi, n_in, n_out


def check_lnss1(lams=(0.0, 1.0, 2.5), n_psi=64, n_tau=16, refine=4, move_tol=0.2, cfg=DEFAULT_CONFIG):
    rows, ok, worst = [], True, 0.0
    for lam in lams:
        base = lnss1_window(lam, n_psi, n_tau, cfg=cfg)
        fine = lnss1_window(lam, _refine(n_psi, refine), _refine(n_tau, refine), cfg=cfg)
        finite = all(math.isfinite(v) for v in base[:2] + fine[:2])
        moved = _moved(base, fine) if finite else math.inf
        worst = max(worst, moved)
        ok &= finite and moved < move_tol
        rows.append({
            "lam": float(lam), "log_r_min": base[0], "log_r_max": base[1],
            "log_r_min_fine": fine[0], "log_r_max_fine": fine[1],
            "included": base[2], "excluded": base[3], "moved": moved,
        })
    return LemmaResult("lnss1", bool(ok), {"max_endpoint_move": worst, "tol": move_tol}, rows)


# ---- elementary angular estimate ----


def check_lnss2(kappas=(-2.0, -0.5, 0.0, 1.0, 3.0), n_angle=64, taus=None):
    taus = np.geomspace(1e-3, 1e2, 21) if taus is None else np.asarray(taus, dtype=float)
    ang = np.linspace(0.0, np.pi, n_angle)
    rows, ok, sup_all = [], True, -math.inf
    for kappa in kappas:
        sup = -math.inf
        for tau in taus:
            for i, eta in enumerate(ang):
                theta = ang[: i + 1]
                lr = np.array([lnss2_log_ratio(kappa, tau, th, eta) for th in theta])
                sup = max(sup, float(lr.max()))
                # theta == eta gives exactly 1; kappa == 0 never exceeds 1
                ok &= lr[-1] == 0.0
                if kappa == 0:
                    ok &= bool(np.all(lr <= 0.0))
        ok &= math.isfinite(sup)
        sup_all = max(sup_all, sup)
        rows.append({"kappa": float(kappa), "log_sup": sup, "sup": math.exp(sup)})
    return LemmaResult("lnss2", bool(ok), {"max_log_sup": sup_all}, rows)


# ---- integral estimate ----


def lnss3_window(nu, eta, n_a, n_d, bs=(0.0, 0.3, 1.0), m=256):
    lo, hi = math.inf, -math.inf
    half_err = 0.0
    for b in bs:
        for a in np.linspace(-1.0, 1.0 - b, n_a):
            for dd in np.geomspace(1e-3, 10.0, n_d):
                lhs = lnss3_lhs(nu, eta, a, b, dd, m=m, log=True)
                lr = lhs - lnss3_rhs(nu, eta, a, b, dd).log_value
                lo, hi = min(lo, lr), max(hi, lr)
                if b == 0 or nu == -0.5:
                    half_err = max(half_err, abs(math.exp(lr) - 0.5))
    return lo, hi, half_err


def check_lnss3(nus=(-0.5, 0.0, 1.0), etas=(0.0, 1.0, 2.5), n_a=3, n_d=16, refine=4, move_tol=0.2,
                half_tol=1e-12, m=256):
    rows, ok, worst, worst_half = [], True, 0.0, 0.0
    for nu in nus:
        for eta in etas:
            base = lnss3_window(nu, eta, n_a, n_d, m=m)
            fine = lnss3_window(nu, eta, _refine(n_a, refine), _refine(n_d, refine), m=m)
            finite = all(math.isfinite(v) for v in base[:2] + fine[:2])
            moved = _moved(base, fine) if finite else math.inf
            half = max(base[2], fine[2])
            worst, worst_half = max(worst, moved), max(worst_half, half)
            ok &= finite and moved < move_tol and half <= half_tol
            rows.append({
                "nu": float(nu), "eta": float(eta), "log_r_min": base[0], "log_r_max": base[1],
                "log_r_min_fine": fine[0], "log_r_max_fine": fine[1], "moved": moved, "half_err": half,
            })
    return LemmaResult(
        "lnss3", bool(ok), {"max_endpoint_move": worst, "max_half_err": worst_half, "tol": move_tol}, rows
    )


# ---- range of xi ----


def cauchy_schwarz_vectors(x, t, y, s, u, v, rho):
    """Lifted vectors whose inner product is ``xi``: ``|x~| <= |y~| = 1``."""
    r2 = rho * rho
    a2 = t * t - r2
    b2 = s * s - r2
    sg = np.sign(s * t)
    xt = np.column_stack((
        x,
        u * np.sqrt(np.maximum(a2 - np.einsum("pi,pi->p", x, x), 0.0)),
        v * np.sqrt(np.maximum(1.0 - a2, 0.0)),
    ))
    yt = np.column_stack((
        sg[:, None] * y,
        sg * np.sqrt(np.maximum(b2 - np.einsum("pi,pi->p", y, y), 0.0)),
        np.sqrt(np.maximum(1.0 - b2, 0.0)),
    ))
    return xt, yt


def check_range_xi(n=100_000, seed=0, dims=(2, 3, 5), tol=1e-12):
    settings = [(Kind.CONE_SURFACE, 0.0), (Kind.CONE_SOLID, 0.0)] + [
        (k, r) for k in (Kind.HYPER_SURFACE, Kind.HYPER_SOLID) for r in (0.5, 1.0)
    ]
    combos = [(k, r, d) for k, r in settings for d in dims]
    rng = np.random.default_rng(seed)
    per = -(-n // len(combos))
    rows, worst, worst_oracle, total = [], 0.0, 0.0, 0
    for kind, rho, d in combos:
        x, t = sample_batch(kind, d, per, rho, rng)
        y, s = sample_batch(kind, d, per, rho, rng)
        u = rng.uniform(-1.0, 1.0, per)
        v = rng.uniform(-1.0, 1.0, per)
        # force the extreme corners on part of the sample
        corner = rng.random(per) < 0.25
        u = np.where(corner, np.sign(u), u)
        v = np.where(corner, np.sign(v), v)
        i1, i2, i3, _ = invariants_from_coords(kind, x, t, y, s, rho)
        xi = i1 + v * i2 + (u * i3 if kind.is_solid else 0.0)
        uu = u if kind.is_solid else np.zeros(per)
        xt, yt = cauchy_schwarz_vectors(x, t, y, s, uu, v, rho)
        oracle = np.einsum("pi,pi->p", xt, yt)
        nx = np.linalg.norm(xt, axis=1)
        ny = np.linalg.norm(yt, axis=1)
        excess = float(np.max(np.abs(xi)) - 1.0)
        agree = float(np.max(np.abs(xi - oracle)))
        cs_ok = bool(np.all(nx <= ny + tol) and np.all(np.abs(ny - 1.0) <= tol))
        worst = max(worst, excess)
        worst_oracle = max(worst_oracle, agree)
        total += per
        rows.append({
            "kind": kind.value, "rho": float(rho), "d": d, "samples": per,
            "max_abs_xi_minus_1": excess, "max_oracle_diff": agree, "norms_ok": int(cs_ok),
        })
    ok = worst <= tol and worst_oracle <= tol and all(r["norms_ok"] for r in rows)
    return LemmaResult(
        "range-xi", bool(ok),
        {"samples": total, "max_abs_xi_minus_1": worst, "max_oracle_diff": worst_oracle}, rows,
    )


# ---- strategy equivalence and hyperboloid transport ----


FUBINI_CELLS = (
    KernelParams(Kind.CONE_SURFACE, "even", 2, 0.5),
    KernelParams(Kind.CONE_SOLID, "even", 2, 0.5, 1.3),
    KernelParams(Kind.HYPER_SURFACE, "even", 3, 1.7, rho=0.5),
    KernelParams(Kind.HYPER_SOLID, "even", 2, 0.0, 1.3, rho=1.0),
    KernelParams(Kind.CONE_SURFACE, "odd", 3, 0.5),
    KernelParams(Kind.CONE_SOLID, "odd", 2, 1.7, 0.0),
)


def _cell_pairs(params, n_pairs, seed, cell):
    return draw_pairs(seed, cell, params.kind, params.d, params.rho, n_pairs)


def check_fubini(cells=FUBINI_CELLS, n_pairs=50, taus=(0.05, 0.2, 1.0), tol=1e-8, seed=0,
                 cfg=DEFAULT_CONFIG):
    rows, worst, ok = [], 0.0, True
    for c, params in enumerate(cells):
        pairs = _cell_pairs(params, n_pairs, seed, c)
        i1, i2, i3, st = invariants_arrays(pairs)
        for tau in taus:
            a = evaluate_invariants(params, tau, i1, i2, i3, st, cfg, "integral")
            b = evaluate_invariants(params, tau, i1, i2, i3, st, cfg, "series")
            both = a.ok & b.ok
            diff = np.abs(a.values[both] - b.values[both])
            rel = float(np.max(diff / np.abs(b.values[both]))) if both.any() else 0.0
            zero = (a.status == "zero") & (b.status == "zero")
            worst = max(worst, rel)
            ok &= rel <= tol and bool(np.all(a.values[zero] == b.values[zero]))
            ok &= bool(np.array_equal(a.status == "zero", b.status == "zero"))
            rows.append({
                **params.to_dict(), "tau": float(tau), "compared": int(both.sum()),
                "excluded": int((~both & ~zero).sum()), "max_rel_diff": rel,
            })
    return LemmaResult("fubini", bool(ok), {"max_rel_diff": worst, "tol": tol}, rows)


TRANSPORT_CELLS = tuple(
    KernelParams(kind, "even", d, g, mu, rho)
    for kind in (Kind.HYPER_SURFACE, Kind.HYPER_SOLID)
    for d, g, mu in ((2, 0.0, 0.0), (3, 1.7, 1.3))
    for rho in (0.5, 1.0)
)


def check_transport(cells=TRANSPORT_CELLS, n_pairs=50, taus=(0.01, 0.1, 1.0), tol=1e-12, seed=0,
                    cfg=DEFAULT_CONFIG):
    rows, worst, worst_inv, worst_noise = [], 0.0, 0.0, 0.0
    for c, params in enumerate(cells):
        pairs = _cell_pairs(params, n_pairs, seed, c)
        h = invariants_arrays(pairs)
        k = invariants_arrays([(to_cone(p), to_cone(q)) for p, q in pairs])
        inv = max(float(np.max(np.abs(x - y))) for x, y in zip(h[:3], k[:3]))
        worst_inv = max(worst_inv, inv)
        for tau in taus:
            a = evaluate_invariants(params, tau, *h, cfg)
            b = evaluate_invariants(params.cone_params, tau, *k, cfg)
            rel, n_cmp, noise = compare_transport(a, b, tol)
            worst, worst_noise = max(worst, rel), max(worst_noise, noise)
            rows.append({**params.to_dict(), "tau": float(tau), "compared": n_cmp,
                         "max_rel_diff": rel, "noise_ratio": noise, "max_invariant_diff": inv})
    ok = worst <= tol and worst_noise <= 1.0 and worst_inv <= 1e-15
    metrics = {"max_rel_diff": worst, "noise_ratio": worst_noise, "max_invariant_diff": worst_inv}
    return LemmaResult("transport", bool(ok), metrics, rows)


_CHECKS = {
    "lnss1": check_lnss1,
    "lnss2": check_lnss2,
    "lnss3": check_lnss3,
    "range-xi": check_range_xi,
    "fubini": check_fubini,
    "transport": check_transport,
}


def run_lemma_checks(which, grid=None):
    """Run one named property suite; ``grid`` holds keyword overrides for it."""
    try:
        fn = _CHECKS[which]
    except KeyError:
        raise DomainError(f"unknown lemma check {which!r}; choose from {list(LEMMAS)}") from None
    return fn(**(grid or {}))

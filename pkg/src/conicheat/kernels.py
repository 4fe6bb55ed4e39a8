"""Reproducing kernels and even/odd Jacobi heat kernels on cones and hyperboloids.

Two evaluation strategies are provided and are meant to be checked against
each other:

``"integral"``
    integrate the one-dimensional heat kernel ``G`` (a single spectral series
    in ``xi``) against the product measure in ``(u, v)``, with one Gauss rule
    exact for the truncated series;
``"series"``
    sum ``exp(-tau * eigenvalue) * P_n`` where each reproducing kernel ``P_n``
    is integrated with its own degree-matched Gauss rule.

Odd kernels use ``P^O_n = factor * s t * P^E_{n-1}`` with the even kernel of
the shifted weight, so ``P^O_0 = 0`` and the odd series starts at ``n = 1``.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .envelopes import log_envelope_batch
from .errors import DomainError, LogUnderflowError, TruncationError, UnsupportedError
from .geometry import Kind, invariants_of
from .quadrature import build_rule, matched_node_count
from .special import DEFAULT_MAX_DEGREE, get_basis

EPS = np.finfo(float).eps
ROUNDOFF_SAFETY = 4.0
STRATEGIES = {
    "integral": "integral",
    "integral-of-G": "integral",
    "series": "series",
    "series-of-projections": "series",
}
# points per chunk in batched evaluation, bounds peak memory
_CHUNK = 1 << 22


@dataclass(frozen=True)
class KernelParams:
    kind: Kind
    parity: str = "even"
    d: int = 2
    gamma: float = 0.0
    mu: float = 0.0
    rho: float = 0.0

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "mu", float(self.mu) if kind.is_solid else 0.0)
        object.__setattr__(self, "rho", float(self.rho) if kind.is_hyper else 0.0)
        if self.parity not in ("even", "odd"):
            raise DomainError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.d < 2:
            raise DomainError(f"d must be >= 2, got {self.d}")
        if not self.gamma >= 0:
            raise DomainError(f"closed-form kernels need gamma >= 0, got {self.gamma}")
        if not self.mu >= 0:
            raise DomainError(f"closed-form kernels need mu >= 0, got {self.mu}")
        if kind.is_hyper and not self.rho > 0:
            raise DomainError(f"rho must be > 0 on {kind.value}, got {self.rho}")
        if self.parity == "odd":
            if kind.is_hyper:
                raise UnsupportedError(
                    f"odd kernel on {kind.value}: Not Available (no closed-form reproducing kernel)"
                )
            if kind == Kind.CONE_SURFACE and self.d == 2:
                raise DomainError("odd surface kernel needs d >= 3: the weight |t|^-2 is not integrable for d = 2")

    @property
    def beta(self):
        if self.kind.is_solid:
            return 0.5 if self.parity == "even" else -0.5
        return 0.0 if self.parity == "even" else -1.0

    @property
    def lam(self):
        """Parameter of the symmetric Jacobi family behind the even kernel."""
        if self.kind.is_solid:
            return self.gamma + self.mu + self.d / 2 - 0.5
        return self.gamma + self.d / 2 - 1

    @property
    def odd_factor(self):
        """Constant in ``P^O_n = factor * s t * P^E_{n-1}`` (``beta`` on the odd side)."""
        if self.kind.is_solid:
            b = -0.5
            return (b + self.mu + (self.d - 1) / 2 + self.gamma + 1) / (b + self.mu + self.d / 2)
        b = -1.0
        return (b + (self.d - 1) / 2 + self.gamma + 1) / (b + self.d / 2)

    def eigenvalue(self, n):
        """Decay rate of the degree-``n`` component (as a positive number)."""
        n = np.asarray(n, dtype=float)
        if self.kind.is_solid:
            # odd side: the printed operator gives n(n + 2g + 2mu + d - 2), e.g. t -> 2g + 2mu + d - 1
            shift = 2 if self.parity == "odd" else 0
            return n * (n + 2 * self.gamma + 2 * self.mu + self.d - shift)
        if self.parity == "odd":
            return n * (n + 2 * self.gamma + self.d - 3)
        return n * (n + 2 * self.gamma + self.d - 1)

    @property
    def cone_params(self):
        """The same parameters moved to the cone kind the domain transports to."""
        if not self.kind.is_hyper:
            return self
        return KernelParams(self.kind.cone, self.parity, self.d, self.gamma, self.mu)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "parity": self.parity,
            "d": self.d,
            "gamma": self.gamma,
            "mu": self.mu,
            "rho": self.rho,
        }


@dataclass(frozen=True)
class EvalConfig:
    """Numerical policy for series evaluation.

    ``quad_nodes=None`` matches the Gauss rule to the truncation degree.
    ``roundoff_guard`` is the largest estimated relative rounding error a
    value may carry before it is reported as precision-limited.
    """

    tail_tol: float = 1e-14
    n_max: int = DEFAULT_MAX_DEGREE
    include_n0: bool = True
    quad_nodes: int = None
    min_exponent_guard: float = -700.0
    roundoff_guard: float = 1e-9

    def __post_init__(self):
        if not self.tail_tol > 0:
            raise DomainError("tail_tol must be > 0")
        if self.n_max < 1:
            raise DomainError("n_max must be >= 1")
        if self.quad_nodes is not None and self.quad_nodes < 1:
            raise DomainError("quad_nodes must be >= 1")


DEFAULT_CONFIG = EvalConfig()


def _truncate(log_c, tail_tol, tail_ratio):
    """Smallest ``N`` with ``sum_{n > N} c_n < tail_tol``; returns ``(N, bound)``.

    ``tail_ratio`` bounds ``c_{n+1}/c_n`` beyond the last entry; the tail past
    the table is then a geometric series.
    """
    c = np.exp(log_c)
    if tail_ratio >= 1.0:
        beyond = math.inf
    else:
        beyond = c[-1] * tail_ratio / (1.0 - tail_ratio)
    # tails[N] = sum_{n > N} c_n
    tails = np.concatenate((np.cumsum(c[::-1])[::-1][1:], [0.0])) + beyond
    ok = np.nonzero(tails < tail_tol)[0]
    if ok.size == 0:
        raise TruncationError(
            f"heat series does not reach tail {tail_tol:g} within n_max={c.size - 1} "
            f"(achieved {tails[-1]:.3g})",
            achieved_bound=float(tails[-1]),
        )
    return int(ok[0]), float(tails[ok[0]])


@lru_cache(maxsize=512)
def _g_coefficients(tau, lam, tail_tol, n_max):
    basis = get_basis(lam, n_max)
    n = np.arange(n_max + 1, dtype=float)
    log_c = -tau * n * (n + 2 * lam + 1) + np.log(basis.z_at_one)
    k = float(n_max)
    ratio = math.exp(-tau * (2 * k + 2 * lam + 2)) * (2 * k + 2 * lam + 3) / (2 * k + 2 * lam + 1) * (
        k + 1 + 2 * lam
    ) / (k + 1)
    N, bound = _truncate(log_c, tail_tol, ratio)
    c = np.exp(log_c[: N + 1])
    c.setflags(write=False)
    return c, bound


def g_coefficients(tau, lam, cfg=DEFAULT_CONFIG):
    """Truncated coefficients ``exp(-tau n(n+2lam+1)) Z_n(1)`` of ``G``."""
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    return _g_coefficients(float(tau), float(lam), cfg.tail_tol, cfg.n_max)[0]


def roundoff_floor(coeffs):
    """Absolute rounding-error estimate for ``sum c_n p_n(w)``, valid for every ``w``."""
    k = np.arange(coeffs.size)
    return ROUNDOFF_SAFETY * EPS * float(np.dot(np.abs(coeffs), k + 1))


def g_heat(tau, lam, w, cfg=DEFAULT_CONFIG):
    """``G_tau^{lam,lam}(1, w) = sum_n exp(-tau n (n + 2 lam + 1)) Z_n^{lam+1/2}(w)``.

    The sum is truncated where the evaluated tail bound ``sum Z_n(1) e^{...}``
    falls below ``cfg.tail_tol``.
    """
    c = g_coefficients(tau, lam, cfg)
    out = get_basis(float(lam), cfg.n_max).series(c, w)
    return float(out) if np.ndim(w) == 0 else out


@lru_cache(maxsize=1024)
def _kernel_coefficients(params, tau, cfg):
    """Coefficients ``c_m`` with kernel ``= prefactor * int sum_m c_m p_m(xi)``.

    ``c_m = exp(-tau E(m)) Z_m(1)`` where ``E`` is the eigenvalue attached to
    the even-kernel degree ``m`` (``m = n - 1`` on the odd side).
    """
    basis = get_basis(params.lam, cfg.n_max)
    m = np.arange(cfg.n_max + 2, dtype=float)
    shift = 1 if params.parity == "odd" else 0
    with np.errstate(divide="ignore"):
        log_c = -tau * params.eigenvalue(m[:-1] + shift) + np.log(basis.z_at_one)
    if params.parity == "even" and not cfg.include_n0:
        log_c[0] = -np.inf
    k = m[-2]
    lam = params.lam
    z_ratio = (2 * k + 2 * lam + 3) / (2 * k + 2 * lam + 1) * (k + 1 + 2 * lam) / (k + 1)
    gap = float(params.eigenvalue(k + 1 + shift) - params.eigenvalue(k + shift))
    N, bound = _truncate(log_c, cfg.tail_tol, math.exp(-tau * gap) * z_ratio)
    c = np.exp(log_c[: N + 1])
    c.setflags(write=False)
    return c, bound


def kernel_coefficients(params, tau, cfg=DEFAULT_CONFIG):
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    return _kernel_coefficients(params, float(tau), cfg)[0]


def _rules(params, m):
    """Gauss rules in ``v`` (for ``dPi_{gamma-1/2}``) and ``u`` (``dPi_{mu-1/2}``, solid only)."""
    rv = build_rule(params.gamma - 0.5, m)
    ru = build_rule(params.mu - 0.5, m) if params.kind.is_solid else None
    return rv, ru


def _xi_grid(i1, i2, i3, rv, ru):
    """``xi`` at every node for each pair, shape ``(P, nv)`` or ``(P, nv, nu)``."""
    xi = i1[:, None] + i2[:, None] * rv.nodes[None, :]
    if ru is not None:
        xi = xi[:, :, None] + i3[:, None, None] * ru.nodes[None, None, :]
    return np.clip(xi, -1.0, 1.0)


def _integrate_nodes(values, rv, ru):
    if ru is None:
        return values @ rv.weights
    return np.einsum("pvu,v,u->p", values, rv.weights, ru.weights)


def _integral_strategy(params, coeffs, i1, i2, i3, cfg):
    m = cfg.quad_nodes or matched_node_count(coeffs.size - 1)
    rv, ru = _rules(params, m)
    basis = get_basis(params.lam, cfg.n_max)
    per_pair = len(rv) * (len(ru) if ru is not None else 1)
    step = max(1, _CHUNK // per_pair)
    out = np.empty(i1.size)
    for lo in range(0, i1.size, step):
        sl = slice(lo, lo + step)
        xi = _xi_grid(i1[sl], i2[sl], i3[sl], rv, ru)
        out[sl] = _integrate_nodes(basis.series(coeffs, xi), rv, ru)
    return out, m


def projections(params, i1, i2, i3, n_lo, n_hi, m, cfg=DEFAULT_CONFIG):
    """``int p_k(xi) dPi dPi`` for ``k = n_lo..n_hi``, shape ``(P, n_hi - n_lo + 1)``.

    ``p_k = P_k / P_k(1)`` is the normalized polynomial of the even kernel's
    family; the rule has ``m`` nodes per axis.
    """
    rv, ru = _rules(params, m)
    basis = get_basis(params.lam, cfg.n_max)
    xi = _xi_grid(np.atleast_1d(i1), np.atleast_1d(i2), np.atleast_1d(i3), rv, ru)
    a, b = basis._a, basis._b
    out = np.empty((xi.shape[0], n_hi - n_lo + 1))
    prev = np.ones_like(xi)
    cur = xi.copy()
    for k in range(0, n_hi + 1):
        if k == 0:
            val = prev
        elif k == 1:
            val = cur
        else:
            prev, cur = cur, a[k] * xi * cur - b[k] * prev
            val = cur
        if k >= n_lo:
            out[:, k - n_lo] = _integrate_nodes(val, rv, ru)
    return out


def _series_strategy(params, coeffs, i1, i2, i3, cfg):
    n_top = coeffs.size - 1
    m_top = cfg.quad_nodes or matched_node_count(n_top)
    terms = np.empty((i1.size, n_top + 1))
    lo, m = 0, 1
    while lo <= n_top:
        m = min(m, m_top)
        hi = n_top if m == m_top else min(2 * m - 1, n_top)
        terms[:, lo : hi + 1] = projections(params, i1, i2, i3, lo, hi, m, cfg) * coeffs[lo : hi + 1]
        lo, m = hi + 1, 2 * m
    return np.array([math.fsum(row) for row in terms]), m_top


@dataclass(frozen=True)
class BatchEvaluation:
    """Kernel values for a batch of pairs with per-pair reliability status.

    ``status`` entries: ``"ok"``, ``"zero"`` (odd kernel with ``st = 0``),
    ``"underflow"`` (predicted magnitude below ``exp(min_exponent_guard)``)
    or ``"roundoff"`` (value below ``floor / roundoff_guard``).
    """

    values: np.ndarray
    floors: np.ndarray
    log_envelope: np.ndarray
    psi: np.ndarray
    status: np.ndarray
    n_terms: int
    nodes: int

    @property
    def ok(self):
        return self.status == "ok"


def _invariant_arrays(params, pairs):
    rows = []
    for p, q in pairs:
        for pt in (p, q):
            if pt.kind != params.kind:
                raise DomainError(f"point kind {pt.kind.value} does not match {params.kind.value}")
            if pt.d != params.d:
                raise DomainError(f"point dimension {pt.d} does not match d={params.d}")
            if pt.kind.is_hyper and pt.rho != params.rho:
                raise DomainError(f"point rho {pt.rho} does not match rho={params.rho}")
        inv = invariants_of(p, q)
        rows.append((inv.i1, inv.i2, inv.i3, inv.st))
    arr = np.array(rows, dtype=float).reshape(-1, 4)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


def evaluate_invariants(params, tau, i1, i2, i3, st, cfg=DEFAULT_CONFIG, strategy="integral"):
    """Heat kernel for arrays of pair invariants; never raises on precision loss."""
    try:
        strategy = STRATEGIES[strategy]
    except KeyError:
        raise DomainError(f"unknown strategy {strategy!r}") from None
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    i1, i2, i3, st = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (i1, i2, i3, st))
    coeffs = kernel_coefficients(params, tau, cfg)
    run = _integral_strategy if strategy == "integral" else _series_strategy
    raw, nodes = run(params, coeffs, i1, i2, i3, cfg)
    floor = roundoff_floor(coeffs)
    if params.parity == "odd":
        pref = params.odd_factor * st
        values = pref * raw
        floors = np.abs(pref) * floor
    else:
        values = raw
        floors = np.full(raw.shape, floor)

    log_env, psi, _ = log_envelope_batch(params, tau, i1, i2, i3, st)
    status = np.full(values.shape, "ok", dtype=object)
    guard = cfg.min_exponent_guard
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(values))
    under = (log_env < guard) | (log_abs < guard)
    status[under] = "underflow"
    status[~under & (floors > cfg.roundoff_guard * np.abs(values))] = "roundoff"
    if params.parity == "odd":
        status[st == 0] = "zero"
        values = np.where(st == 0, 0.0, values)
    return BatchEvaluation(values, floors, log_env, psi, status.astype(str), coeffs.size - 1, nodes)


def evaluate_pairs(params, tau, pairs, cfg=DEFAULT_CONFIG, strategy="integral"):
    """Heat kernel for a sequence of ``(p, q)`` point pairs."""
    i1, i2, i3, st = _invariant_arrays(params, pairs)
    return evaluate_invariants(params, tau, i1, i2, i3, st, cfg, strategy)


def heat_kernel(params, tau, p, q, cfg=DEFAULT_CONFIG, strategy="integral"):
    """Even or odd Jacobi heat kernel between ``p`` and ``q``.

    Raises :class:`LogUnderflowError` when the value cannot be resolved in
    double precision; the exception carries the log envelope estimate.
    """
    ev = evaluate_pairs(params, tau, [(p, q)], cfg, strategy)
    status = ev.status[0]
    if status in ("underflow", "roundoff"):
        raise LogUnderflowError(
            f"kernel magnitude not resolvable ({status}); log envelope {ev.log_envelope[0]:.6g}",
            log_envelope=float(ev.log_envelope[0]),
            reason=status,
        )
    return float(ev.values[0])


def heat_kernel_odd(params, tau, p, q, cfg=DEFAULT_CONFIG, strategy="integral"):
    if params.parity != "odd":
        raise DomainError("heat_kernel_odd needs parity='odd'")
    return heat_kernel(params, tau, p, q, cfg, strategy)


def repro_kernel(params, n, p, q, cfg=DEFAULT_CONFIG):
    """Reproducing kernel of the degree-``n`` even or odd subspace at ``(p, q)``.

    The Gauss rule has ``ceil((n + 1) / 2)`` nodes per axis, exact for the
    degree-``n`` integrand.
    """
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    i1, i2, i3, st = _invariant_arrays(params, [(p, q)])
    k = n - 1 if params.parity == "odd" else n
    if k < 0:
        return 0.0
    basis = get_basis(params.lam, cfg.n_max)
    m = cfg.quad_nodes or matched_node_count(k)
    even = basis.zfun_at_one(k) * float(projections(params, i1, i2, i3, k, k, m, cfg)[0, 0])
    if params.parity == "odd":
        return params.odd_factor * float(st[0]) * even
    return even

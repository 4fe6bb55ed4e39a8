"""scikit-learn style front end.

Rows of ``X`` are points ``[x_1, ..., x_d, t]`` of one domain. ``fit`` stores
the reference points; ``transform(Y)`` returns the matrix ``K[i, j]`` between
``Y[i]`` and the fitted ``X[j]``.
"""
from numbers import Real

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DomainError
from .geometry import DEFAULT_TOL, Kind, invariants_from_coords
from .kernels import EvalConfig, KernelParams, STRATEGIES, evaluate_invariants
from .envelopes import log_envelope_batch


def check_points(X, kind, rho=0.0, tol=DEFAULT_TOL):
    """Validate an ``(n, d + 1)`` array of domain points; returns ``(x, t)``.

    Raises :class:`DomainError` naming the first offending row.
    """
    kind = Kind(kind)
    X = check_array(X, dtype=np.float64, ensure_min_features=3)
    x, t = X[:, :-1], X[:, -1]
    r2 = rho * rho if kind.is_hyper else 0.0
    lo, hi = kind.height_range(rho)
    at = np.abs(t)
    gap = np.einsum("ij,ij->i", x, x) - (t * t - r2)
    scale = tol * np.maximum(1.0, t * t)
    bad_shape = gap > scale if kind.is_solid else np.abs(gap) > scale
    bad = bad_shape | (at < lo - tol) | (at > hi + tol)
    if bad.any():
        i = int(np.argmax(bad))
        raise DomainError(f"row {i} is not a point of {kind.value} (rho={rho:g}): x={x[i].tolist()}, t={t[i]:g}")
    return x, t


def _pair_grid(x, t, y, s):
    n, m = len(t), len(s)
    xx = np.repeat(x, m, axis=0)
    tt = np.repeat(t, m)
    yy = np.tile(y, (n, 1))
    ss = np.tile(s, n)
    return xx, tt, yy, ss


class _DomainEstimator(TransformerMixin, BaseEstimator):
    def __init__(self, kind="ConeSurface", parity="even", gamma=0.0, mu=0.0, rho=0.0, tau=0.1):
        self.kind = kind
        self.parity = parity
        self.gamma = gamma
        self.mu = mu
        self.rho = rho
        self.tau = tau

    def _rho(self):
        return float(self.rho) if Kind(self.kind).is_hyper else 0.0

    def fit(self, X, y=None):
        if not (isinstance(self.tau, Real) and self.tau > 0):
            raise ValueError(f"tau must be a positive number, got {self.tau!r}")
        x, t = check_points(X, self.kind, self._rho())
        self.params_ = KernelParams(Kind(self.kind), self.parity, x.shape[1], self.gamma, self.mu, self._rho())
        self.x_fit_, self.t_fit_ = x, t
        self.n_features_in_ = x.shape[1] + 1
        return self

    def _invariants(self, Y):
        check_is_fitted(self, "params_")
        Y = check_array(Y, dtype=np.float64, ensure_min_features=3)
        if Y.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {Y.shape[1]} features, but {type(self).__name__} was fitted with {self.n_features_in_}")
        y, s = check_points(Y, self.kind, self._rho())
        xx, tt, yy, ss = _pair_grid(y, s, self.x_fit_, self.t_fit_)
        return (len(s), len(self.t_fit_)), invariants_from_coords(self.params_.kind, xx, tt, yy, ss, self._rho())


class JacobiHeatKernel(_DomainEstimator):
    """Even or odd Jacobi heat kernel at time ``tau`` as a transformer.

    After ``transform``, ``status_`` holds the per-entry reliability flags
    (``ok``, ``zero``, ``underflow``, ``roundoff``) of the last call.
    """

    def __init__(self, kind="ConeSurface", parity="even", gamma=0.0, mu=0.0, rho=0.0, tau=0.1,
                 strategy="integral", tail_tol=1e-14, n_max=4096):
        super().__init__(kind, parity, gamma, mu, rho, tau)
        self.strategy = strategy
        self.tail_tol = tail_tol
        self.n_max = n_max

    def fit(self, X, y=None):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {sorted(STRATEGIES)}, got {self.strategy!r}")
        self.eval_config_ = EvalConfig(tail_tol=self.tail_tol, n_max=self.n_max)
        return super().fit(X, y)

    def evaluate(self, Y):
        """Full :class:`BatchEvaluation` over every (row of Y, fitted point) pair, flattened row-major."""
        shape, inv = self._invariants(Y)
        return shape, evaluate_invariants(self.params_, self.tau, *inv, self.eval_config_, self.strategy)

    def transform(self, Y):
        shape, ev = self.evaluate(Y)
        self.status_ = ev.status.reshape(shape)
        return ev.values.reshape(shape)


class HeatKernelEnvelope(_DomainEstimator):
    """Closed-form two-sided estimate matching :class:`JacobiHeatKernel` up to constants.

    ``log=True`` returns the log of the magnitude; odd envelopes then carry
    their sign separately (``sign(st)``) and vanish where ``st = 0``.
    """

    def __init__(self, kind="ConeSurface", parity="even", gamma=0.0, mu=0.0, rho=0.0, tau=0.1, log=False):
        super().__init__(kind, parity, gamma, mu, rho, tau)
        self.log = log

    def transform(self, Y):
        shape, (i1, i2, i3, st) = self._invariants(Y)
        log_env, _, sign = log_envelope_batch(self.params_, self.tau, i1, i2, i3, st)
        log_env = log_env.reshape(shape)
        if self.log:
            return log_env
        return sign.reshape(shape) * np.exp(log_env)

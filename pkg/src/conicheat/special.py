"""Symmetric Jacobi polynomials P_n^{(lam, lam)} and the kernel function Z_n.

Conventions
-----------
* ``P_n(1) = Gamma(n + lam + 1) / (Gamma(lam + 1) n!)`` (classical Jacobi).
* ``h_n`` is the squared norm of ``P_n`` under the probability measure
  ``dPi_{lam + 1/2}``, i.e. density proportional to ``(1 - z^2)^lam``.
* ``Z_n(z) = P_n(1) P_n(z) / h_n``, so that ``Z_0 = 1`` and
  ``int Z_n Z_m dPi = delta_nm Z_n(1)``.

Evaluation goes through the normalized polynomial ``p_n(z) = P_n(z) / P_n(1)``
which satisfies ``|p_n| <= 1`` on [-1, 1] and the recurrence

    (n + 2 lam) p_n = (2n + 2 lam - 1) z p_{n-1} - (n - 1) p_{n-2}.
"""
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError

DEFAULT_MAX_DEGREE = 4096


class UltrasphericalBasis:
    """Cached recurrence data for ``P_n^{(lam, lam)}``, ``n <= n_max``.

    Instances are immutable once constructed and may be shared freely.
    """

    def __init__(self, lam, n_max=DEFAULT_MAX_DEGREE):
        lam = float(lam)
        if not lam >= 0.0:
            raise DomainError(f"lambda must be >= 0, got {lam!r}")
        if n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {n_max!r}")
        self.lam = lam
        self.n_max = int(n_max)

        n = np.arange(1, self.n_max + 1, dtype=float)
        # recurrence coefficients, index 0 unused
        self._a = np.concatenate(([0.0], (2 * n + 2 * lam - 1) / (n + 2 * lam)))
        self._b = np.concatenate(([0.0], (n - 1) / (n + 2 * lam)))

        # consecutive ratios, multiplied up; avoids lgamma cancellation at large n
        p1 = np.cumprod((n + lam) / n)
        z1 = np.cumprod((2 * n + 2 * lam + 1) / (2 * n + 2 * lam - 1) * (n + 2 * lam) / n)
        h = np.cumprod(
            (2 * n + 2 * lam - 1) / (2 * n + 2 * lam + 1) * (n + lam) ** 2 / (n * (n + 2 * lam))
        )
        self._p_at_one = np.concatenate(([1.0], p1))
        self._z_at_one = np.concatenate(([1.0], z1))
        self._h = np.concatenate(([1.0], h))
        for arr in (self._a, self._b, self._p_at_one, self._z_at_one, self._h):
            arr.setflags(write=False)

    def __repr__(self):
        return f"UltrasphericalBasis(lam={self.lam!r}, n_max={self.n_max})"

    def _check_degree(self, n):
        if n < 0:
            raise DomainError(f"degree must be >= 0, got {n}")
        if n > self.n_max:
            raise CapacityError(f"degree {n} exceeds working cap n_max={self.n_max}")

    @property
    def z_at_one(self):
        """Read-only array ``Z_n(1)`` for ``n = 0..n_max``."""
        return self._z_at_one

    def p_at_one(self, n):
        self._check_degree(n)
        return float(self._p_at_one[n])

    def norm_h(self, n):
        """Squared norm of ``P_n`` under the normalized measure ``dPi_{lam+1/2}``."""
        self._check_degree(n)
        return float(self._h[n])

    def zfun_at_one(self, n):
        self._check_degree(n)
        return float(self._z_at_one[n])

    def normalized(self, n, z):
        """``P_n(z) / P_n(1)`` by forward recurrence."""
        self._check_degree(n)
        z = _as_unit_interval(z)
        prev = np.ones_like(z)
        if n == 0:
            return prev
        cur = z.copy()
        a, b = self._a, self._b
        for k in range(2, n + 1):
            prev, cur = cur, a[k] * z * cur - b[k] * prev
        return cur

    def normalized_table(self, n_hi, z):
        """Array of shape ``(n_hi + 1,) + z.shape`` with ``P_k(z)/P_k(1)``."""
        self._check_degree(n_hi)
        z = _as_unit_interval(z)
        out = np.empty((n_hi + 1,) + z.shape)
        out[0] = 1.0
        if n_hi >= 1:
            out[1] = z
        a, b = self._a, self._b
        for k in range(2, n_hi + 1):
            np.multiply(z, out[k - 1], out=out[k])
            out[k] *= a[k]
            out[k] -= b[k] * out[k - 2]
        return out

    def eval_pnn(self, n, z):
        p = self.normalized(n, z)
        return _unwrap(self._p_at_one[n] * p, z)

    def zfun(self, n, z):
        p = self.normalized(n, z)
        return _unwrap(self._z_at_one[n] * p, z)

    def series(self, coeffs, z):
        """Evaluate ``sum_k coeffs[k] * P_k(z) / P_k(1)`` for ``z`` of any shape.

        Forward recurrence with a Kahan-compensated running sum per point.
        """
        coeffs = np.ascontiguousarray(coeffs, dtype=float)
        self._check_degree(coeffs.size - 1)
        z = _as_unit_interval(z)
        flat = np.ascontiguousarray(z.reshape(-1))
        out = np.empty_like(flat)
        _series_kernel(coeffs, self._a, self._b, flat, out)
        return out.reshape(z.shape)


@njit(cache=True)
def _series_kernel(c, a, b, z, out):
    # blocks of points stay in cache while the degree loop runs; the inner
    # loop over points is independent and vectorizes
    n_hi = c.size - 1
    block = 512
    p0 = np.empty(block)
    p1 = np.empty(block)
    acc = np.empty(block)
    comp = np.empty(block)
    for start in range(0, z.size, block):
        m = min(block, z.size - start)
        for j in range(m):
            x = z[start + j]
            p0[j] = 1.0
            p1[j] = x
            acc[j] = c[0]
            comp[j] = 0.0
            if n_hi >= 1:
                acc[j] += c[1] * x
        for k in range(2, n_hi + 1):
            ak = a[k]
            bk = b[k]
            ck = c[k]
            for j in range(m):
                p2 = ak * z[start + j] * p1[j] - bk * p0[j]
                p0[j] = p1[j]
                p1[j] = p2
                y = ck * p2 - comp[j]
                s = acc[j] + y
                comp[j] = (s - acc[j]) - y
                acc[j] = s
        for j in range(m):
            out[start + j] = acc[j]


def _as_unit_interval(z):
    z = np.array(z, dtype=float)
    if np.any(np.abs(z) > 1.0):
        raise DomainError("argument must lie in [-1, 1]")
    return z


def _unwrap(value, z):
    return float(value) if np.ndim(z) == 0 else value


@lru_cache(maxsize=64)
def get_basis(lam, n_max=DEFAULT_MAX_DEGREE):
    """Process-wide cache of bases keyed by ``(lam, n_max)``."""
    return UltrasphericalBasis(lam, n_max)


def eval_pnn(lam, n, z):
    return get_basis(float(lam)).eval_pnn(n, z)


def norm_h(lam, n):
    return get_basis(float(lam)).norm_h(n)


def zfun(lam, n, z):
    return get_basis(float(lam)).zfun(n, z)

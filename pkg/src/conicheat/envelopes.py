"""Closed-form two-sided envelopes for the Jacobi heat kernels, in log domain.

Every envelope is returned as an :class:`EnvelopeValue` whose ``log_value`` is
the natural log of its magnitude; the Gaussian factor alone underflows double
precision long before the ratios we care about stop being meaningful.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy.special import beta, logsumexp, roots_jacobi

from .errors import DomainError, UnsupportedError


@dataclass(frozen=True)
class EnvelopeValue:
    log_value: float
    psi: float
    factors: tuple = field(default=())
    sign: int = 1

    @property
    def is_zero(self):
        return self.sign == 0

    @property
    def value(self):
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_value)


def _psi(z):
    return np.arccos(np.clip(z, -1.0, 1.0))


def envelope_g(tau, lam, psi):
    """``tau^(-lam-1) (tau + pi - psi)^(-lam-1/2) exp(-psi^2 / (4 tau))``."""
    if not 0 < tau <= 1:
        raise DomainError(f"envelope of G is stated for tau in (0, 1], got {tau}")
    if not 0 <= psi <= math.pi:
        raise DomainError(f"psi must lie in [0, pi], got {psi}")
    factors = (
        ("tau", (-lam - 1) * math.log(tau)),
        ("angle", (-lam - 0.5) * math.log(tau + math.pi - psi)),
        ("gaussian", -psi * psi / (4 * tau)),
    )
    return EnvelopeValue(math.fsum(f for _, f in factors), psi, factors)


def log_envelope_g(tau, lam, psi):
    """Vectorized ``envelope_g(...).log_value`` over arrays of ``tau``/``psi``."""
    tau = np.asarray(tau, dtype=float)
    psi = np.asarray(psi, dtype=float)
    return (-lam - 1) * np.log(tau) + (-lam - 0.5) * np.log(tau + np.pi - psi) - psi**2 / (4 * tau)


def even_factor_logs(params, tau, i1, i2, i3, literal_i3=False):
    """Per-factor log contributions of the even envelope, vectorized over pairs.

    On solid kinds the interior term enters through ``|I3|``: when
    ``sign(st) = -1`` the integrand peaks at ``u = -1`` and the maximal
    ``xi`` is ``I1 + I2 + |I3|``. ``literal_i3=True`` keeps the sign instead.
    Returns ``(psi, [(name, log array), ...])``.
    """
    i1, i2, i3 = (np.asarray(a, dtype=float) for a in (i1, i2, i3))
    d, g, mu = params.d, params.gamma, params.mu
    solid = params.kind.is_solid
    b3 = i3 if literal_i3 else np.abs(i3)
    top = i1 + i2 + (b3 if solid else 0.0)
    psi = _psi(top)
    if tau > 1:
        return psi, []
    lt = math.log(tau)
    if solid:
        factors = [
            ("tau", np.full(psi.shape, (-d / 2 - 0.5) * lt)),
            ("angle", (-g - mu - d / 2) * np.log(tau + np.pi - psi)),
            ("i2", -g * np.log(np.maximum(i2, tau))),
            ("i3", -mu * np.log(np.maximum(b3, tau))),
        ]
    else:
        factors = [
            ("tau", np.full(psi.shape, (-d / 2) * lt)),
            ("angle", (-g - d / 2 + 0.5) * np.log(np.pi - psi + tau)),
            ("i2", -g * np.log(np.maximum(i2, tau))),
        ]
    factors.append(("gaussian", -(psi**2) / (4 * tau)))
    return psi, factors


def log_envelope_batch(params, tau, i1, i2, i3, st, literal_i3=False):
    """Log-magnitude, ``psi`` and sign of the envelope for arrays of pairs.

    Odd parity multiplies by ``st``; the log magnitude is ``-inf`` where
    ``st == 0``. For ``tau > 1`` the even envelope is the constant 1.
    """
    psi, factors = even_factor_logs(params, tau, i1, i2, i3, literal_i3)
    log_abs = np.zeros(psi.shape)
    for _, f in factors:
        log_abs = log_abs + f
    sign = np.ones(psi.shape, dtype=int)
    if params.parity == "odd":
        st = np.asarray(st, dtype=float)
        with np.errstate(divide="ignore"):
            log_abs = log_abs + np.log(np.abs(st))
        sign = np.sign(st).astype(int)
    return log_abs, psi, sign


def _scalar_envelope(params, tau, inv, literal_i3, odd):
    psi, factors = even_factor_logs(params, tau, inv.i1, inv.i2, inv.i3, literal_i3)
    named = [(name, float(v)) for name, v in factors]
    if odd:
        if inv.st == 0:
            return EnvelopeValue(-math.inf, float(psi), tuple(named), 0)
        named.append(("st", math.log(abs(inv.st))))
    sign = int(np.sign(inv.st)) if odd else 1
    return EnvelopeValue(math.fsum(v for _, v in named), float(psi), tuple(named), sign)


def envelope_even(params, tau, inv, literal_i3=False):
    """Sharp envelope of the even heat kernel for the pair with invariants ``inv``."""
    if params.parity != "even":
        raise DomainError("odd parity: use envelope_odd")
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    return _scalar_envelope(params, tau, inv, literal_i3, odd=False)


def envelope_odd(params, tau, inv, literal_i3=False):
    """``s t`` times the even envelope, returned as sign plus log magnitude."""
    if params.kind.is_hyper:
        raise UnsupportedError(f"odd kernel on {params.kind.value}: Not Available (no closed form)")
    if params.parity != "odd":
        raise DomainError("even parity: use envelope_even")
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    return _scalar_envelope(params, tau, inv, literal_i3, odd=True)


def _check_lnss3(nu, A, B, D):
    if not nu >= -0.5:
        raise DomainError(f"nu must be >= -1/2, got {nu}")
    if not 0 <= B <= 1:
        raise DomainError(f"B must lie in [0, 1], got {B}")
    if not -1 - 1e-12 <= A <= 1 - B + 1e-12:
        raise DomainError(f"A must lie in [-1, 1 - B], got {A}")
    if not D > 0:
        raise DomainError(f"D must be > 0, got {D}")


def lnss3_rhs(nu, eta, A, B, D):
    """Closed-form side of the one-dimensional integral estimate.

    ``D^(nu+1/2) (pi - Phi(1) + D)^(-eta) (B / (pi - Phi(1)) + D)^(-nu-1/2)
    exp(-Phi(1)^2 / D)`` with ``Phi(w) = arccos(A + B w)`` and the ``B``
    quotient read as 0 when ``B == 0``.
    """
    _check_lnss3(nu, A, B, D)
    phi1 = float(_psi(A + B))
    gap = math.pi - phi1
    b_term = 0.0 if B == 0 else B / gap
    factors = (
        ("D", (nu + 0.5) * math.log(D)),
        ("angle", -eta * math.log(gap + D)),
        ("B", (-nu - 0.5) * math.log(b_term + D)),
        ("gaussian", -phi1 * phi1 / D),
    )
    return EnvelopeValue(math.fsum(f for _, f in factors), phi1, factors)


@lru_cache(maxsize=32)
def _half_rule(nu, m):
    """Nodes in ``[0, 1]`` and weights of ``dPi_nu`` restricted there (total mass 1/2)."""
    if nu == -0.5:
        return np.array([1.0]), np.array([0.5])
    a = nu - 0.5
    # Gauss-Jacobi in (1 - w)^a on [0, 1]; the smooth factor (1 + w)^a goes into the weights
    x, wx = roots_jacobi(m, a, 0.0)
    w = 0.5 * (1.0 + x)
    weights = wx * 0.5 ** (a + 1) * (1.0 + w) ** a / beta(0.5, nu + 0.5)
    return w, weights


def lnss3_lhs(nu, eta, A, B, D, m=256, c=1.0, log=False):
    """``int_0^1 (pi - Phi(w) + c D)^(-eta) exp(-Phi(w)^2 / D) dPi_nu(w)``.

    ``dPi_nu`` is not renormalized on the half line, so ``[0, 1]`` carries
    mass 1/2. The rule is Gauss-Jacobi on ``[0, 1]`` itself (folding the
    symmetric rule would put a kink at 0); summation is in log domain.
    """
    _check_lnss3(nu, A, B, D)
    w, weights = _half_rule(float(nu), int(m))
    phi = _psi(A + B * w)
    logf = -eta * np.log(np.pi - phi + c * D) - phi**2 / D
    out = float(logsumexp(logf, b=weights))
    return out if log else math.exp(out)


def lnss2_log_ratio(kappa, tau, theta, eta_angle):
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    if not 0 <= theta <= math.pi or not 0 <= eta_angle <= math.pi:
        raise DomainError("angles must lie in [0, pi]")
    if theta > eta_angle:
        raise DomainError(f"requires theta <= eta, got {theta} > {eta_angle}")
    return kappa * (math.log(tau + math.pi - eta_angle) - math.log(tau + math.pi - theta)) - (
        (eta_angle - theta) * (eta_angle + theta) / tau
    )


def lnss2_check(kappa, tau, theta, eta_angle):
    """``[(tau+pi-eta)^k e^(-eta^2/tau)] / [(tau+pi-theta)^k e^(-theta^2/tau)]``."""
    return math.exp(lnss2_log_ratio(kappa, tau, theta, eta_angle))

"""Gauss rules for the symmetric probability measures dPi_eta on [-1, 1].

``dPi_eta`` has density proportional to ``(1 - z^2)^(eta - 1/2)`` for
``eta > -1/2``; at ``eta == -1/2`` it is the two-point measure
``(delta_{-1} + delta_{+1}) / 2``.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError

DIRAC_ETA = -0.5


@dataclass(frozen=True, eq=False)
class SymmetricRule:
    eta: float
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return self.nodes.size

    @property
    def is_dirac(self):
        return self.eta == DIRAC_ETA

    def integrate(self, f):
        return integrate(self, f)


def _recurrence_offdiag(eta, m):
    # monic three-term recurrence of the measure; beta_1 = int z^2 dPi_eta
    k = np.arange(2, m, dtype=float)
    beta = k * (k + 2 * eta - 1) / ((2 * k + 2 * eta) * (2 * k + 2 * eta - 2))
    return np.sqrt(np.concatenate(([1.0 / (2 * eta + 2)], beta)))


@lru_cache(maxsize=256)
def build_rule(eta, m):
    """Gauss rule with ``m`` nodes for ``dPi_eta`` (Golub-Welsch).

    Exact for polynomials of degree ``<= 2m - 1``. For ``eta == -1/2`` the
    two-point Dirac rule is returned whatever ``m`` is.
    """
    eta = float(eta)
    m = int(m)
    if not eta >= DIRAC_ETA:
        raise DomainError(f"eta must be >= -1/2, got {eta!r}")
    if m < 1:
        raise DomainError(f"node count must be >= 1, got {m}")
    if eta == DIRAC_ETA:
        nodes = np.array([-1.0, 1.0])
        weights = np.array([0.5, 0.5])
    elif m == 1:
        nodes = np.array([0.0])
        weights = np.array([1.0])
    else:
        nodes, vecs = eigh_tridiagonal(np.zeros(m), _recurrence_offdiag(eta, m))
        weights = vecs[0] ** 2
        # enforce the reflection symmetry the measure has
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
        weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SymmetricRule(eta, nodes, weights)


def matched_node_count(degree):
    """Smallest node count making a Gauss rule exact for ``degree``."""
    return max(1, -(-(int(degree) + 1) // 2))


def integrate(rule, f):
    """``sum_i w_i f(z_i)``; ``f`` is called once on the node array."""
    values = np.asarray(f(rule.nodes), dtype=float)
    return float(np.dot(rule.weights, np.broadcast_to(values, rule.nodes.shape)))


"""Points of the double cone and hyperboloid domains and their pair invariants."""
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DomainError

DEFAULT_TOL = 1e-9


class Kind(str, Enum):
    CONE_SURFACE = "ConeSurface"
    CONE_SOLID = "ConeSolid"
    HYPER_SURFACE = "HyperSurface"
    HYPER_SOLID = "HyperSolid"

    @property
    def is_solid(self):
        return self in (Kind.CONE_SOLID, Kind.HYPER_SOLID)

    @property
    def is_hyper(self):
        return self in (Kind.HYPER_SURFACE, Kind.HYPER_SOLID)

    @property
    def cone(self):
        """The cone kind a hyperboloid kind is transported to."""
        return Kind.CONE_SOLID if self.is_solid else Kind.CONE_SURFACE

    def height_range(self, rho=0.0):
        if self.is_hyper:
            return rho, float(np.sqrt(rho * rho + 1.0))
        return 0.0, 1.0


@dataclass(frozen=True)
class DomainPoint:
    kind: Kind
    x: tuple
    t: float
    rho: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def d(self):
        return len(self.x)

    @property
    def xvec(self):
        return np.array(self.x)

    def to_dict(self):
        return {"kind": self.kind.value, "d": self.d, "rho": self.rho, "t": self.t, "x": list(self.x)}

    @classmethod
    def from_dict(cls, data):
        x = list(data["x"])
        if "d" in data and int(data["d"]) != len(x):
            raise DomainError(f"d={data['d']} does not match len(x)={len(x)}")
        return cls(Kind(data["kind"]), x, data["t"], data.get("rho", 0.0))


class Violation(NamedTuple):
    constraint: str
    excess: float

    def __str__(self):
        return f"{self.constraint} violated by {self.excess:.3g}"


def validate(p, tol=DEFAULT_TOL):
    """Return the list of violated domain constraints (empty when ``p`` is valid)."""
    out = []
    if p.d < 2:
        out.append(Violation("d >= 2", float(2 - p.d)))
    r2 = float(np.dot(p.xvec, p.xvec))
    t2 = p.t * p.t
    at = abs(p.t)
    lo, hi = p.kind.height_range(p.rho)
    scale = tol * max(1.0, t2)
    if p.kind.is_hyper:
        if not p.rho > 0:
            out.append(Violation("rho > 0", -p.rho))
        gap = r2 - (t2 - p.rho * p.rho)
    else:
        if p.rho != 0:
            out.append(Violation("rho == 0 on the cone", abs(p.rho)))
        gap = r2 - t2
    if p.kind.is_solid:
        if gap > scale:
            out.append(Violation("|x|^2 <= t^2 - rho^2", gap))
    elif abs(gap) > scale:
        out.append(Violation("|x|^2 == t^2 - rho^2", gap))
    if at < lo - tol:
        out.append(Violation(f"|t| >= {lo:g}", lo - at))
    if at > hi + tol:
        out.append(Violation(f"|t| <= {hi:.17g}", at - hi))
    return out


def check_point(p, tol=DEFAULT_TOL):
    bad = validate(p, tol)
    if bad:
        raise DomainError(f"invalid {p.kind.value} point: " + "; ".join(map(str, bad)))
    return p


def to_cone(p):
    """Transport a hyperboloid point to the cone via ``t -> sign(t) sqrt(t^2 - rho^2)``."""
    if not p.kind.is_hyper:
        return p
    tp = np.sign(p.t) * np.sqrt(max(p.t * p.t - p.rho * p.rho, 0.0))
    return DomainPoint(p.kind.cone, p.x, tp, 0.0)


@dataclass(frozen=True)
class PairInvariants:
    kind: Kind
    i1: float
    i2: float
    i3: float
    sign_st: int
    st: float

    def xi(self, u, v):
        return xi(self, u, v)

    @property
    def xi_max(self):
        """``xi`` at its maximizing corner (``v = 1``, ``u = sign(i3)``)."""
        return self.i1 + self.i2 + abs(self.i3)


def _sign(a):
    return int(np.sign(a))


def invariants_of(p, q):
    """Pair invariants ``I1, I2, I3`` (hyperboloid analogues for hyper kinds)."""
    if p.kind != q.kind:
        raise DomainError(f"kind mismatch: {p.kind.value} vs {q.kind.value}")
    if p.d != q.d:
        raise DomainError(f"dimension mismatch: {p.d} vs {q.d}")
    if p.rho != q.rho:
        raise DomainError(f"rho mismatch: {p.rho} vs {q.rho}")
    i1, i2, i3, _ = invariants_from_coords(p.kind, p.xvec[None], p.t, q.xvec[None], q.t, p.rho)
    st = p.t * q.t
    return PairInvariants(p.kind, float(i1[0]), float(i2[0]), float(i3[0]), _sign(st), st)


def invariants_arrays(pairs):
    """Stack invariants of ``(p, q)`` pairs into arrays ``i1, i2, i3, st``."""
    inv = [invariants_of(p, q) for p, q in pairs]
    return (
        np.array([v.i1 for v in inv]),
        np.array([v.i2 for v in inv]),
        np.array([v.i3 for v in inv]),
        np.array([v.st for v in inv]),
    )


def xi(inv, u, v):
    """``I1 + v I2 + u I3`` (``u`` has no effect on surface kinds since ``I3 = 0``)."""
    return inv.i1 + v * inv.i2 + u * inv.i3


def clamp_unit(z):
    return np.clip(z, -1.0, 1.0)


def sample_random(kind, d, rho=0.0, rng_seed=None):
    """Draw a point of ``kind`` in dimension ``d``.

    ``|t|`` is uniform on the kind's height range with a random sign, the
    direction of ``x`` is uniform on the sphere, and on solid kinds the
    radius is ``|t'| U^(1/d)``, uniform in the ball section.
    """
    kind = Kind(kind)
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    rho = float(rho) if kind.is_hyper else 0.0
    if kind.is_hyper and not rho > 0:
        raise DomainError(f"rho must be > 0 for {kind.value}, got {rho}")
    rng = np.random.default_rng(rng_seed)
    lo, hi = kind.height_range(rho)
    at = rng.uniform(lo, hi)
    t = at if rng.random() < 0.5 else -at
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    radius = np.sqrt(max(at * at - rho * rho, 0.0))
    if kind.is_solid:
        radius *= rng.random() ** (1.0 / d)
    p = DomainPoint(kind, radius * direction, t, rho)
    return check_point(p, 1e-12)


def invariants_from_coords(kind, x, t, y, s, rho=0.0):
    """Vectorized invariants for coordinate arrays ``x, y: (P, d)``, ``t, s: (P,)``.

    Returns ``(i1, i2, i3, st)``; hyper kinds use the direct ``rho`` formulas.
    """
    kind = Kind(kind)
    x, y = np.atleast_2d(x), np.atleast_2d(y)
    t, s = np.atleast_1d(np.asarray(t, dtype=float)), np.atleast_1d(np.asarray(s, dtype=float))
    r2 = rho * rho if kind.is_hyper else 0.0
    st = s * t
    sg = np.sign(st)
    i1 = np.einsum("pi,pi->p", x, y) * sg
    i2 = np.sqrt(np.maximum(1.0 + r2 - t * t, 0.0)) * np.sqrt(np.maximum(1.0 + r2 - s * s, 0.0))
    if kind.is_solid:
        ax = np.maximum(t * t - r2 - np.einsum("pi,pi->p", x, x), 0.0)
        ay = np.maximum(s * s - r2 - np.einsum("pi,pi->p", y, y), 0.0)
        i3 = np.sqrt(ax) * np.sqrt(ay) * sg
    else:
        i3 = np.zeros_like(i1)
    return i1, i2, i3, st


def sample_batch(kind, d, n, rho=0.0, rng=None):
    """``n`` points drawn with the law of :func:`sample_random`, as arrays ``(x, t)``."""
    kind = Kind(kind)
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    rho = float(rho) if kind.is_hyper else 0.0
    if kind.is_hyper and not rho > 0:
        raise DomainError(f"rho must be > 0 for {kind.value}, got {rho}")
    rng = np.random.default_rng(rng)
    lo, hi = kind.height_range(rho)
    at = rng.uniform(lo, hi, n)
    t = np.where(rng.random(n) < 0.5, at, -at)
    direction = rng.standard_normal((n, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = np.sqrt(np.maximum(at * at - rho * rho, 0.0))
    if kind.is_solid:
        radius = radius * rng.random(n) ** (1.0 / d)
    return radius[:, None] * direction, t

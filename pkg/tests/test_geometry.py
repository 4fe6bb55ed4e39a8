import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conicheat import (
    DomainError,
    DomainPoint,
    Kind,
    check_point,
    invariants_from_coords,
    invariants_of,
    sample_batch,
    sample_random,
    to_cone,
    validate,
    xi,
)

KINDS = list(Kind)


def _rho_for(kind, rho):
    return rho if kind.is_hyper else 0.0


def brute_invariants(p, q):
    r2 = p.rho**2 if p.kind.is_hyper else 0.0
    sg = math.copysign(1.0, p.t * q.t) if p.t * q.t != 0 else 0.0
    i1 = sum(a * b for a, b in zip(p.x, q.x)) * sg
    i2 = math.sqrt(1 + r2 - p.t**2) * math.sqrt(1 + r2 - q.t**2)
    i3 = 0.0
    if p.kind.is_solid:
        i3 = math.sqrt(max(p.t**2 - r2 - sum(a * a for a in p.x), 0)) * math.sqrt(
            max(q.t**2 - r2 - sum(b * b for b in q.x), 0)
        ) * sg
    return i1, i2, i3


@settings(max_examples=80, deadline=None)
@given(kind=st.sampled_from(KINDS), d=st.integers(2, 6), rho=st.sampled_from([0.5, 1.0, 2.0]),
       seed=st.integers(0, 2**32 - 1))
def test_samples_lie_in_domain(kind, d, rho, seed):
    p = sample_random(kind, d, _rho_for(kind, rho), seed)
    assert validate(p, 1e-12) == []
    x, t = sample_batch(kind, d, 50, _rho_for(kind, rho), seed)
    for xi_, ti in zip(x, t):
        assert validate(DomainPoint(kind, xi_, ti, _rho_for(kind, rho)), 1e-12) == []


@settings(max_examples=80, deadline=None)
@given(kind=st.sampled_from(KINDS), d=st.integers(2, 5), seed=st.integers(0, 2**32 - 1))
def test_invariants_brute_force(kind, d, seed):
    rho = _rho_for(kind, 0.7)
    p = sample_random(kind, d, rho, seed)
    q = sample_random(kind, d, rho, seed + 1)
    inv = invariants_of(p, q)
    assert np.allclose((inv.i1, inv.i2, inv.i3), brute_invariants(p, q), atol=1e-15)
    assert inv.st == p.t * q.t


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from([Kind.HYPER_SURFACE, Kind.HYPER_SOLID]), d=st.integers(2, 4),
       rho=st.sampled_from([0.5, 1.0]), seed=st.integers(0, 2**32 - 1))
def test_transport_preserves_invariants(kind, d, rho, seed):
    p = sample_random(kind, d, rho, seed)
    q = sample_random(kind, d, rho, seed ^ 0xABCDEF)
    a = invariants_of(p, q)
    b = invariants_of(to_cone(p), to_cone(q))
    assert to_cone(p).kind == kind.cone
    assert validate(to_cone(p), 1e-12) == []
    assert abs(a.i1 - b.i1) <= 1e-15
    assert abs(a.i2 - b.i2) <= 1e-15
    assert abs(a.i3 - b.i3) <= 1e-15
    assert a.sign_st == b.sign_st


@settings(max_examples=200, deadline=None)
@given(kind=st.sampled_from(KINDS), d=st.integers(2, 5), seed=st.integers(0, 2**32 - 1),
       u=st.floats(-1, 1), v=st.floats(-1, 1))
def test_xi_in_unit_interval(kind, d, seed, u, v):
    rho = _rho_for(kind, 1.0)
    inv = invariants_of(sample_random(kind, d, rho, seed), sample_random(kind, d, rho, seed + 7))
    assert abs(xi(inv, u, v)) <= 1 + 1e-12
    assert abs(inv.xi_max) <= 1 + 1e-12
    assert inv.xi_max >= xi(inv, u, v) - 1e-15


def test_coincident_surface_point_has_xi_one():
    p = DomainPoint(Kind.CONE_SURFACE, (0.6, 0.0), 0.6)
    inv = invariants_of(p, p)
    assert inv.xi_max == pytest.approx(1.0, abs=1e-15)


def test_vectorized_matches_scalar():
    kind, d, rho = Kind.HYPER_SOLID, 3, 0.5
    x, t = sample_batch(kind, d, 20, rho, 3)
    y, s = sample_batch(kind, d, 20, rho, 4)
    i1, i2, i3, stv = invariants_from_coords(kind, x, t, y, s, rho)
    for j in range(20):
        inv = invariants_of(DomainPoint(kind, x[j], t[j], rho), DomainPoint(kind, y[j], s[j], rho))
        assert (inv.i1, inv.i2, inv.i3, inv.st) == (i1[j], i2[j], i3[j], stv[j])


def test_json_round_trip():
    p = sample_random("HyperSolid", 3, 0.5, 11)
    q = DomainPoint.from_dict(json.loads(json.dumps(p.to_dict())))
    assert q == p
    assert p.to_dict()["d"] == 3


@pytest.mark.parametrize(
    "point",
    [
        DomainPoint(Kind.CONE_SURFACE, (0.5, 0.0), 0.6),
        DomainPoint(Kind.CONE_SOLID, (0.7, 0.0), 0.6),
        DomainPoint(Kind.CONE_SOLID, (0.0, 0.0), 1.2),
        DomainPoint(Kind.CONE_SURFACE, (0.0,), 0.0),
        DomainPoint(Kind.HYPER_SURFACE, (0.6, 0.0), 0.6, 0.5),
        DomainPoint(Kind.HYPER_SOLID, (0.0, 0.0), 0.3, 0.5),
        DomainPoint(Kind.HYPER_SOLID, (0.0, 0.0), 0.6, 0.0),
        DomainPoint(Kind.CONE_SOLID, (0.0, 0.0), 0.5, 0.3),
    ],
)
def test_invalid_points_rejected(point):
    assert validate(point)
    with pytest.raises(DomainError):
        check_point(point)


def test_valid_edge_points():
    for p in (
        DomainPoint(Kind.CONE_SURFACE, (0.0, 0.0), 0.0),
        DomainPoint(Kind.CONE_SOLID, (0.0, 0.0), -1.0),
        DomainPoint(Kind.HYPER_SURFACE, (0.0, 0.0), 0.5, 0.5),
        DomainPoint(Kind.HYPER_SOLID, (0.0, 0.0, 1.0), -math.sqrt(1.25), 0.5),
    ):
        assert validate(p) == []


def test_mismatched_pairs_rejected():
    p = sample_random("ConeSolid", 2, rng_seed=0)
    with pytest.raises(DomainError):
        invariants_of(p, sample_random("ConeSurface", 2, rng_seed=0))
    with pytest.raises(DomainError):
        invariants_of(p, sample_random("ConeSolid", 3, rng_seed=0))
    with pytest.raises(DomainError):
        DomainPoint.from_dict({"kind": "ConeSolid", "d": 3, "t": 0.5, "x": [0.1, 0.1]})


def test_sampler_needs_positive_rho():
    with pytest.raises(DomainError):
        sample_random("HyperSurface", 2, 0.0)

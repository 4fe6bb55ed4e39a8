import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from conicheat import (
    DomainError,
    DomainPoint,
    HeatKernelEnvelope,
    JacobiHeatKernel,
    KernelParams,
    Kind,
    check_points,
    heat_kernel,
    sample_batch,
)


def _points(kind, d, n, rho=0.0, seed=0):
    x, t = sample_batch(kind, d, n, rho, seed)
    return np.column_stack([x, t])


def test_transform_matches_pointwise():
    X = _points("HyperSolid", 2, 4, 0.5, 1)
    Y = _points("HyperSolid", 2, 3, 0.5, 2)
    est = JacobiHeatKernel(kind="HyperSolid", gamma=0.5, mu=1.3, rho=0.5, tau=0.2).fit(X)
    K = est.transform(Y)
    assert K.shape == (3, 4) and est.status_.shape == (3, 4)
    params = KernelParams(Kind.HYPER_SOLID, "even", 2, 0.5, 1.3, 0.5)
    for i in range(3):
        for j in range(4):
            p = DomainPoint(Kind.HYPER_SOLID, Y[i, :2], Y[i, 2], 0.5)
            q = DomainPoint(Kind.HYPER_SOLID, X[j, :2], X[j, 2], 0.5)
            assert K[i, j] == pytest.approx(heat_kernel(params, 0.2, p, q), rel=1e-13)


def test_fit_transform_symmetric():
    X = _points("ConeSurface", 3, 6, seed=3)
    K = JacobiHeatKernel(kind="ConeSurface", gamma=1.7, tau=0.1).fit_transform(X)
    assert np.allclose(K, K.T, rtol=1e-13)


def test_envelope_estimator_and_ratio():
    X = _points("ConeSolid", 2, 5, seed=4)
    kw = dict(kind="ConeSolid", parity="odd", gamma=0.5, mu=1.3, tau=0.3)
    K = JacobiHeatKernel(**kw).fit(X).transform(X)
    E = HeatKernelEnvelope(**kw).fit(X).transform(X)
    logE = HeatKernelEnvelope(log=True, **kw).fit(X).transform(X)
    assert np.all(np.sign(K) == np.sign(E))
    assert np.allclose(np.log(np.abs(E)), logE)
    assert np.all(np.abs(np.log(K / E)) < 5)


def test_params_and_clone():
    est = JacobiHeatKernel(kind="ConeSolid", mu=1.3, tau=0.5, strategy="series")
    params = est.get_params()
    assert params["mu"] == 1.3 and params["strategy"] == "series"
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(tau=0.7)
    assert est.tau == 0.7


def test_pipeline_compatible():
    X = _points("ConeSurface", 2, 4, seed=5)
    pipe = make_pipeline(JacobiHeatKernel(tau=0.3))
    assert pipe.fit_transform(X).shape == (4, 4)


def test_validation_errors():
    X = _points("ConeSurface", 2, 4, seed=6)
    with pytest.raises(NotFittedError):
        JacobiHeatKernel().transform(X)
    with pytest.raises(DomainError, match="row 1"):
        JacobiHeatKernel().fit(np.array([[0.6, 0.0, 0.6], [0.5, 0.0, 0.6]]))
    with pytest.raises(ValueError):
        JacobiHeatKernel().fit(np.array([[0.1, 0.2]]))
    with pytest.raises(ValueError):
        JacobiHeatKernel().fit(np.array([[np.nan, 0.0, 0.6]]))
    with pytest.raises(ValueError):
        JacobiHeatKernel(tau=0).fit(X)
    with pytest.raises(ValueError):
        JacobiHeatKernel(strategy="magic").fit(X)
    est = JacobiHeatKernel().fit(X)
    with pytest.raises(ValueError, match="features"):
        est.transform(_points("ConeSurface", 3, 2))


def test_check_points_kinds():
    x, t = check_points(_points("HyperSurface", 2, 5, 1.0, 7), "HyperSurface", 1.0)
    assert x.shape == (5, 2) and t.shape == (5,)
    with pytest.raises(DomainError):
        check_points(_points("HyperSurface", 2, 5, 1.0, 7), "HyperSurface", 0.5)
    with pytest.raises(DomainError):
        check_points(np.array([[0.0, 0.0, 1.5]]), "ConeSolid")

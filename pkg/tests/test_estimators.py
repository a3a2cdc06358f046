import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from impactlab import ImpactKernel, RhoLaw, ScenarioSpec
from impactlab.averaging import psi
from impactlab.estimators import AverageImpactCurve, EquilibriumIndexEstimator, TailIndexEstimator
from impactlab.generator import gen_equilibrium
from impactlab.sizes import LengthLaw, sample_length


@pytest.fixture(scope="module")
def sqrt_path():
    return gen_equilibrium(ScenarioSpec(n=10_000, seed=1), ImpactKernel(0.5))[1]


@pytest.mark.parametrize("method", ["friction", "loglog", "local"])
def test_equilibrium_estimator_recovers_rho(sqrt_path, method):
    est = EquilibriumIndexEstimator(method=method).fit(sqrt_path.volumes.reshape(-1, 1), sqrt_path.impacts)
    assert abs(est.rho_ - 0.5) < 0.02
    assert set(est.rho_estimates_) == {"friction", "loglog", "local"}
    np.testing.assert_allclose(est.friction_, sqrt_path.friction, rtol=1e-14)


def test_equilibrium_estimator_predict(sqrt_path):
    est = EquilibriumIndexEstimator().fit(sqrt_path.volumes[:, None], sqrt_path.impacts)
    s = sqrt_path.cumulative_sizes
    pred = est.predict(s[:, None])
    assert pred[-1] == pytest.approx(sqrt_path.impacts[-1], rel=1e-12)
    assert np.median(np.abs(pred[-1000:] / sqrt_path.impacts[-1000:] - 1)) < 0.01
    assert est.score(s[-1000:, None], sqrt_path.impacts[-1000:]) > 0.99


def test_estimator_api_contract(sqrt_path):
    est = EquilibriumIndexEstimator(method="loglog", tail_fraction=0.3)
    assert est.get_params() == {"method": "loglog", "tail_fraction": 0.3}
    assert clone(est).set_params(method="local").method == "local"
    with pytest.raises(NotFittedError):
        est.predict([[1.0]])
    with pytest.raises(ValueError):
        EquilibriumIndexEstimator(method="bogus").fit([[1.0]], [1.0])
    with pytest.raises(ValueError):
        est.fit(np.ones((3, 1)), np.ones(2))


def test_tail_index_estimator():
    x = sample_length(LengthLaw(1.5), seed=7, size=1_000_000)
    est = TailIndexEstimator().fit(x)
    assert 1.4 <= est.tail_index_ <= 1.6
    assert est.n_samples_ == x.size
    assert est.predict([1.0, 10.0])[0] == 1.0
    with pytest.raises(NotFittedError):
        TailIndexEstimator().predict([1.0])


def test_average_impact_curve():
    rhos = np.random.default_rng(0).uniform(0, 1, 5000)
    curve = AverageImpactCurve().fit(rhos)
    x = np.array([0.1, 0.5, 1.0])
    np.testing.assert_allclose(curve.predict(x), [np.mean(v**rhos) for v in x], rtol=1e-12)
    np.testing.assert_allclose(curve.predict(x), psi(RhoLaw.uniform01(), x), atol=0.01)

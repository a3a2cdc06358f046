import math

import numpy as np
import pytest

from impactlab import (
    DomainError,
    ImpactKernel,
    ImpactPath,
    NoFairPricingError,
    NoiseSpec,
    RelaxationProfile,
    ScenarioSpec,
    eval_G,
    fair_pricing,
    inverse_G,
    relax_paths,
)
from impactlab.generator import gen_equilibrium
from impactlab.relaxation import fair_pricing_times, second_differences

EXP = RelaxationProfile(alpha=0.5, family="exponential", tau=1.0)
POW = RelaxationProfile(alpha=0.2, family="power", t0=2.0, p=0.7)


def test_eval_G_examples():
    assert eval_G(RelaxationProfile(alpha=0.0), 0.0) == 1.0
    assert eval_G(EXP, 100.0) - 0.5 < 1e-12
    assert eval_G(EXP, math.log(3)) == pytest.approx(2 / 3, rel=1e-15)


@pytest.mark.parametrize("profile", [EXP, POW])
def test_G_decreasing_convex(profile):
    t = np.linspace(0, 50, 5001)
    g = eval_G(profile, t)
    assert g[0] == 1.0
    assert np.all(np.diff(g) <= 0)
    # strict while G is resolvable from its floor in double precision
    live = g[:-1] - profile.alpha > 1e-12
    assert np.all(np.diff(g)[live] < 0)
    assert np.all(second_differences(profile) >= -1e-15)


@pytest.mark.parametrize("profile", [EXP, POW])
@pytest.mark.parametrize("r", [1.0, 0.95, 2 / 3, 0.51, 0.5 + 1e-9])
def test_inverse_round_trip(profile, r):
    if r <= profile.alpha:
        pytest.skip("below asymptote")
    t = inverse_G(profile, r)
    assert t >= 0
    assert eval_G(profile, t) == pytest.approx(r, abs=1e-12)


def test_inverse_examples():
    assert inverse_G(EXP, 1.0) == 0.0
    assert inverse_G(EXP, 2 / 3) == pytest.approx(math.log(3), rel=1e-14)
    with pytest.raises(NoFairPricingError):
        inverse_G(EXP, 0.4)
    with pytest.raises(NoFairPricingError):
        inverse_G(EXP, 0.5)


def test_profile_validation():
    with pytest.raises(DomainError):
        RelaxationProfile(alpha=0.6)
    with pytest.raises(DomainError):
        RelaxationProfile(family="linear")
    with pytest.raises(DomainError):
        RelaxationProfile(tau=0.0)
    with pytest.raises(DomainError):
        NoiseSpec(std_scale=-1.0)
    with pytest.raises(DomainError):
        eval_G(EXP, -1.0)


def test_fair_pricing_square_root_path():
    _, path = gen_equilibrium(ScenarioSpec(n=100_000, seed=1), ImpactKernel(0.5))
    fp = fair_pricing(path, EXP)
    assert fp.time == pytest.approx(math.log(3), abs=1e-3)
    assert fp.residual_at_T == pytest.approx(path.avg_impacts[-1], rel=1e-12)
    assert fp.residual_at_inf == 0.5 * path.impacts[-1]


def test_fair_pricing_unit_friction():
    path = ImpactPath.from_impacts([1.0, 1.0], [2.0, 2.0])
    fp = fair_pricing(path, EXP)
    assert fp.time == 0.0 and fp.residual_at_T == 2.0


def test_full_reversion_without_information():
    _, path = gen_equilibrium(ScenarioSpec(n=100), ImpactKernel(0.5))
    assert fair_pricing(path, RelaxationProfile(alpha=0.0)).residual_at_inf == 0.0


def test_no_fair_pricing_below_asymptote():
    _, path = gen_equilibrium(ScenarioSpec(n=1000), ImpactKernel(2.0))
    with pytest.raises(NoFairPricingError):
        fair_pricing(path, EXP)


def test_residual_proportionality():
    for rho in (0.2, 0.9):
        _, path = gen_equilibrium(ScenarioSpec(n=500, seed=3), ImpactKernel(rho))
        fp = fair_pricing(path, POW)
        assert fp.residual_at_inf / path.impacts[-1] == pytest.approx(POW.alpha, rel=1e-15)


def test_relax_paths_noiseless_exact():
    _, path = gen_equilibrium(ScenarioSpec(n=100), ImpactKernel(0.5))
    t, g = relax_paths(path, POW, NoiseSpec(0.0), horizon=20.0, m=5)
    np.testing.assert_array_equal(g, eval_G(POW, t))


def test_relax_paths_converges_and_is_job_invariant():
    _, path = gen_equilibrium(ScenarioSpec(n=100), ImpactKernel(0.5))
    noise = NoiseSpec(0.2, seed=11)
    t, g1 = relax_paths(path, EXP, noise, horizon=10.0, m=10_000)
    _, g4 = relax_paths(path, EXP, noise, horizon=10.0, m=10_000, jobs=4)
    np.testing.assert_array_equal(g1, g4)
    assert np.max(np.abs(g1 - eval_G(EXP, t))) < 0.01


def test_fair_pricing_times_vectorised():
    paths = [gen_equilibrium(ScenarioSpec(n=300, seed=s), ImpactKernel(0.5))[1] for s in range(5)]
    times, r = fair_pricing_times(paths, EXP)
    np.testing.assert_allclose(eval_G(EXP, times), r, atol=1e-12)


def test_jensen_direction_for_convex_profile():
    # G^-1 is convex, so the mean time dominates the time of the mean residual
    rng = np.random.default_rng(0)
    paths = [gen_equilibrium(ScenarioSpec(n=500, seed=s), ImpactKernel(rng.uniform(0.1, 1.0)))[1]
             for s in range(200)]
    times, r = fair_pricing_times(paths, POW)
    assert times.mean() >= inverse_G(POW, r.mean())

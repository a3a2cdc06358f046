import math

import numpy as np
import pytest

from impactlab import DomainError
from impactlab.sizes import (
    LengthLaw,
    SizeLaw,
    bracket_burn_in,
    conditional_size_moment,
    hazard_ratio,
    hill_estimator,
    moment_exponent,
    sample_length,
    sample_size,
    size_bracket_probability,
)


def direct_survival(beta, n_max, n):
    k = np.arange(1, n_max + 1, dtype=float)
    w = k ** -(1 + beta)
    return math.fsum(w[n - 1:]) / math.fsum(w)


@pytest.mark.parametrize("beta", [0.5, 1.5, 3.0])
def test_normaliser_and_survival_against_summation(beta):
    law = LengthLaw(beta, n_max=200_000)
    k = np.arange(1, law.n_max + 1, dtype=float)
    assert law.normalizer == pytest.approx(math.fsum(k ** -(1 + beta)), rel=1e-13)
    for n in (1, 2, 10, 1000, 50_000):
        assert law.survival(n) == pytest.approx(direct_survival(beta, law.n_max, n), rel=1e-9)
    assert float(np.sum(law.pmf(k))) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("beta", [0.5, 1.5, 3.0])
def test_hazard_ratio(beta):
    law = LengthLaw(beta)
    assert abs(hazard_ratio(law, 1000) - (1 + 1e-3) ** -beta) < 1e-3
    # oracle: direct summation on a smaller truncation with the same head
    small = LengthLaw(beta, n_max=100_000)
    want = direct_survival(beta, small.n_max, 1001) / direct_survival(beta, small.n_max, 1000)
    assert hazard_ratio(small, 1000) == pytest.approx(want, rel=1e-9)


def test_hill_estimate_on_samples():
    samples = sample_length(LengthLaw(1.5), seed=7, size=1_000_000)
    assert 1.4 <= hill_estimator(samples) <= 1.6


def test_sampler_matches_pmf():
    law = LengthLaw(1.5, n_max=1000)
    x = sample_length(law, seed=3, size=200_000)
    assert x.min() >= 1 and x.max() <= 1000
    for n in (1, 2, 5):
        p = law.pmf(n)
        assert abs(np.mean(x == n) - p) < 4 * math.sqrt(p * (1 - p) / x.size)


def test_sampler_far_tail_bisection():
    law = LengthLaw(0.5, n_max=10**7)
    x = sample_length(law, seed=1, size=100_000)
    far = x > 1 << 16
    assert far.any()
    # P(N >= 10^6) under the law vs frequency
    p = float(law.survival(10**6))
    assert abs(np.mean(x >= 10**6) - p) < 4 * math.sqrt(p * (1 - p) / x.size)


def test_truncation_at_one():
    assert set(sample_length(LengthLaw(1.5, n_max=1), seed=0, size=100).tolist()) == {1}
    assert sample_length(LengthLaw(1.5), seed=0) >= 1


def test_size_support_and_width():
    n = np.full(100_000, 100)
    law = SizeLaw(0.0, "lower", 1.0, 2.0)
    q = sample_size(n, law, seed=2)
    assert q.min() >= 100 and q.max() <= 200
    assert q.min() < 101 and q.max() > 199
    lo, hi = SizeLaw(10.0, "lower", 1.0, 2.0).support(100)
    assert hi - lo < 1e-6 and lo == 100
    lo, hi = SizeLaw(0.5, "upper", 1.0, 2.0).support(100)
    assert hi == 200 and hi - lo == pytest.approx(10.0)


def test_size_validation():
    with pytest.raises(DomainError):
        SizeLaw(-1.0)
    with pytest.raises(DomainError):
        SizeLaw(0.0, "middle")
    with pytest.raises(DomainError):
        sample_size(0, SizeLaw(), seed=0)
    with pytest.raises(DomainError):
        LengthLaw(0.0)


def test_bracket_bounds_reference_case():
    law, size = LengthLaw(1.5), SizeLaw(0.0, "lower", 1.0, 2.0)
    checks = [size_bracket_probability(law, size, n) for n in (100, 300, 1000)]
    assert all(c.lower_ok and c.upper_ok for c in checks)
    assert bracket_burn_in(checks) == 100


def test_bracket_degenerate_range_equals_pmf():
    law = LengthLaw(1.5)
    c = size_bracket_probability(law, SizeLaw(0.0, "lower", 1.0, 1.0), 500)
    assert c.probability == pytest.approx(float(law.pmf(500)), rel=1e-14)
    assert c.lower_ok


def test_bracket_slope():
    law, size = LengthLaw(1.5), SizeLaw(0.0, "lower", 1.0, 2.0)
    n = np.unique(np.round(np.geomspace(100, 10_000, 40))).astype(int)
    p = [size_bracket_probability(law, size, k).probability for k in n]
    slope = np.polyfit(np.log(n), np.log(p), 1)[0]
    # finite-n corrections leave the slope a hair above -beta
    assert -2.5 <= slope <= -1.5 + 1e-3


def test_bracket_probability_against_simulation():
    law, size = LengthLaw(1.5, n_max=10**5), SizeLaw(0.3, "upper", 1.0, 2.0)
    lengths = sample_length(law, seed=5, size=2_000_000)
    q = sample_size(lengths, size, seed=6)
    n = 20
    exact = size_bracket_probability(law, size, n).probability
    freq = np.mean((q >= n) & (q <= 2 * n))
    assert abs(freq - exact) < 4 * math.sqrt(exact / lengths.size)


def test_burn_in_reporting():
    law, size = LengthLaw(3.0), SizeLaw(0.0, "lower", 1.0, 1.2)
    checks = [size_bracket_probability(law, size, n) for n in (10, 100, 1000)]
    assert bracket_burn_in(checks) is not None


def test_upper_constant_fails_for_wide_ranges():
    # the true ceiling scales like (q_plus / q_minus)**beta; 2C/beta is too small here
    c = size_bracket_probability(LengthLaw(3.0), SizeLaw(0.0, "lower", 1.0, 2.0), 1000)
    assert not c.upper_ok
    ceiling = LengthLaw(3.0).tail_constant * 2.0**3 / 3.0 * 1000**-3.0
    assert c.probability <= ceiling


def test_conditional_moment_closed_form():
    law = SizeLaw(0.4, "upper", 1.0, 3.0)
    for n in (1.0, 17.0, 1e5):
        lo, hi = law.support(n)
        for nu in (0.0, 0.7, 2.0):
            want = (hi ** (1 + nu) - lo ** (1 + nu)) / ((1 + nu) * (hi - lo))
            assert conditional_size_moment(nu, n, law) == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("beta", [0.5, 1.5, 3.0])
@pytest.mark.parametrize("gamma,variant", [(0.0, "lower"), (0.5, "upper"), (2.0, "lower")])
def test_moment_verdicts(beta, gamma, variant):
    verdicts = []
    for f in (0.5, 0.9, 1.0, 1.1, 2.0):
        m = moment_exponent(f * beta, beta, gamma, variant)
        assert abs(m.exponent - (1 + beta - f * beta)) < 0.05
        verdicts.append(m.finite)
    assert verdicts == [True, True, False, False, False]


def test_moment_examples():
    assert moment_exponent(1.0, 1.5).exponent == pytest.approx(1.5, abs=0.05)
    assert moment_exponent(1.0, 1.5).finite
    assert not moment_exponent(1.5, 1.5).finite
    m = moment_exponent(2.0, 1.5)
    assert m.exponent == pytest.approx(0.5, abs=0.05) and not m.finite

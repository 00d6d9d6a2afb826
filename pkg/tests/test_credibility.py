import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gridrisk.credibility import (
    estimate_variance,
    normal_quantile,
    relative_error_bound,
    report,
    required_samples,
)
from gridrisk.errors import ValidationError
from gridrisk.risk import RiskMatrices, Strategy, estimate_risk_strategy


def matrices_from(c, ratio):
    c = np.asarray(c, dtype=float)
    ratio = np.asarray(ratio, dtype=float)
    return RiskMatrices(
        c=c,
        p=np.ones_like(ratio),
        q=ratio,
        ratio=ratio,
        y0=0.0,
        component_ids=tuple(range(1, ratio.shape[0] + 1)),
        n=len(c),
        shed=c,
    )


def _phi_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _quantile_by_bisection(p, lo=-12.0, hi=12.0):
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _phi_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_quantile_median_is_zero():
    assert normal_quantile(0.5) == 0.0


def test_quantile_table_values():
    assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    assert normal_quantile(0.95) == pytest.approx(1.644854, abs=1e-6)


def test_quantile_against_bisection_oracle():
    for p in (0.001, 0.01, 0.1, 0.3, 0.6, 0.9, 0.975, 0.999, 0.999999):
        assert normal_quantile(p) == pytest.approx(
            _quantile_by_bisection(p), abs=1e-8
        )


def test_quantile_domain():
    for bad in (0.0, 1.0, -0.3, 1.7):
        with pytest.raises(ValidationError):
            normal_quantile(bad)


def test_variance_all_equal_is_zero():
    m = matrices_from([5.0, 5.0, 5.0], [[1.0, 1.0, 1.0]])
    risk = estimate_risk_strategy(m, Strategy.of([]))
    variance, per_sample = estimate_variance(m, Strategy.of([]), risk)
    assert variance == 0.0
    assert per_sample == 0.0


def test_variance_two_sample_arithmetic():
    m = matrices_from([1.0, 3.0], [[1.0, 1.0]])
    variance, per_sample = estimate_variance(m, Strategy.of([]), 2.0)
    assert per_sample == pytest.approx(2.0)
    assert variance == pytest.approx(1.0)


def test_variance_needs_two_samples():
    m = matrices_from([1.0], [[1.0]])
    with pytest.raises(ValidationError):
        estimate_variance(m, Strategy.of([]), 1.0)


def test_relative_error_zero_variance():
    assert relative_error_bound(2.0, 0.0, 0.95) == 0.0


def test_relative_error_example():
    value = relative_error_bound(2.0, 0.01, 0.95)
    assert value == pytest.approx(1.959964 * 0.1 / 2.0, abs=1e-6)


def test_relative_error_zero_risk_rejected():
    with pytest.raises(ValidationError):
        relative_error_bound(0.0, 0.01, 0.95)


def test_required_samples_example():
    assert required_samples(4.0, 2.0, 0.95, 0.1) == 385


def test_required_samples_inverse_square():
    # the pre-ceiling requirement scales exactly as 1/eps^2; after ceiling,
    # 4*ceil(x) - ceil(4x) lies in [0, 3]
    base = required_samples(4.0, 2.0, 0.95, 0.1)
    halved = required_samples(4.0, 2.0, 0.95, 0.05)
    assert 0 <= 4 * base - halved <= 3
    z = normal_quantile(0.975)
    assert (z / 0.05) ** 2 == pytest.approx(4 * (z / 0.1) ** 2, rel=1e-12)


def test_required_samples_floor():
    assert required_samples(0.0, 2.0, 0.95, 0.1) == 1


@given(
    st.floats(0.1, 100.0),
    st.floats(0.1, 50.0),
    st.floats(0.5, 0.99),
    st.floats(0.01, 1.0),
)
def test_required_samples_monotonicity(d, risk, beta, eps):
    base = required_samples(d, risk, beta, eps)
    assert required_samples(d * 2, risk, beta, eps) >= base
    assert required_samples(d, risk * 2, beta, eps) <= base
    assert required_samples(d, risk, min(beta + 0.005, 0.995), eps) >= base
    assert required_samples(d, risk, beta, eps * 2) <= base


def test_report_fields_consistent():
    rng = np.random.default_rng(5)
    c = np.where(rng.random(5000) < 0.2, rng.uniform(10, 100, 5000), 0.0)
    m = matrices_from(c, np.full((2, 5000), 0.7))
    rep = report(m, Strategy.of([1]), beta=0.9, eps_bar=0.05)
    assert rep.n == 5000
    assert rep.per_sample_variance == pytest.approx(rep.variance * rep.n)
    assert rep.interval[0] == pytest.approx(rep.risk - rep.absolute_half_width)
    assert rep.interval[1] == pytest.approx(rep.risk + rep.absolute_half_width)
    assert rep.epsilon_hat == pytest.approx(rep.absolute_half_width / rep.risk)
    assert rep.interval[0] == pytest.approx((1 - rep.epsilon_hat) * rep.risk)
    assert rep.interval[1] == pytest.approx((1 + rep.epsilon_hat) * rep.risk)
    assert rep.required_n >= 1
    assert not rep.normality_warning


def test_report_zero_risk_absolute_only():
    m = matrices_from([0.0, 0.0, 0.0], [[1.0, 1.0, 1.0]])
    rep = report(m, Strategy.of([]))
    assert rep.risk == 0.0
    assert rep.epsilon_hat is None
    assert rep.required_n is None
    assert rep.absolute_half_width == 0.0
    assert rep.normality_warning


def test_report_warns_on_few_nonzero():
    c = np.zeros(1000)
    c[:5] = 50.0
    m = matrices_from(c, np.ones((1, 1000)))
    rep = report(m, Strategy.of([]))
    assert rep.nonzero_samples == 5
    assert rep.normality_warning


def test_epsilon_shrinks_as_sqrt_n():
    # replication means of epsilon-hat across growing N fit a -1/2 power law
    rng = np.random.default_rng(11)
    sizes = (1_000, 10_000, 100_000)
    means = []
    for n in sizes:
        eps = []
        for _ in range(12):
            c = np.where(rng.random(n) < 0.3, rng.uniform(0, 100, n), 0.0)
            m = matrices_from(c, np.ones((1, n)))
            rep = report(m, Strategy.of([]), beta=0.9)
            eps.append(rep.epsilon_hat)
        means.append(np.mean(eps))
    slope = np.polyfit(np.log(sizes), np.log(means), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)

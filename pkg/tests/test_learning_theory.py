import math

import pytest

from thermolearn.errors import ValidationError
from thermolearn.learning_theory import approximation_ratio, pac_sample_bound


def test_sample_bound_hand_value():
    # 1/0.1 * ln(2000/0.1) rounded up
    expected = math.ceil(10.0 * math.log(20000.0))
    assert pac_sample_bound(0.1, 0.1, 2000) == expected


def test_sample_bound_monotone_in_tolerance():
    assert pac_sample_bound(0.01, 0.1, 100) > pac_sample_bound(0.1, 0.1, 100)


def test_sample_bound_doubling_hypotheses_costs_at_most_ln2_over_eps():
    eps = 0.05
    base = pac_sample_bound(eps, 0.05, 512)
    doubled = pac_sample_bound(eps, 0.05, 1024)
    assert doubled - base <= math.ceil(math.log(2.0) / eps)
    assert doubled >= base


def test_sample_bound_slack_term():
    base = pac_sample_bound(0.1, 0.1, 100, k=0.0)
    slacked = pac_sample_bound(0.1, 0.1, 100, k=3.0)
    assert slacked == math.ceil(10.0 * (math.log(1000.0) + 3.0))
    assert slacked > base


def test_sample_bound_validation():
    with pytest.raises(ValidationError):
        pac_sample_bound(0.0, 0.1, 10)
    with pytest.raises(ValidationError):
        pac_sample_bound(0.1, 1.5, 10)
    with pytest.raises(ValidationError):
        pac_sample_bound(0.1, 0.1, 0)
    with pytest.raises(ValidationError):
        pac_sample_bound(0.1, 0.1, 10, k=float("nan"))


def test_ratio_optimal_cost():
    assert approximation_ratio(10.0, 10.0) == pytest.approx(1.0)


def test_ratio_hand_value():
    assert approximation_ratio(15.0, 10.0) == pytest.approx(1.5)


def test_ratio_never_below_one_for_valid_costs():
    assert approximation_ratio(10.0, 10.000001) >= 0.999999


def test_ratio_validation():
    with pytest.raises(ValidationError):
        approximation_ratio(-1.0, 10.0)
    with pytest.raises(ValidationError):
        approximation_ratio(10.0, 0.0)

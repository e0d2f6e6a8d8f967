# ./tests/unit/module_utils/baselines/test_backward_difference.py

from fractions import Fraction

import numpy as np
import pytest

from numdiff.module_utils.baselines.backward_difference import (
    BackwardDifferenceDifferentiator,
    bd_first,
    bd_second,
)
from numdiff.module_utils.common.errors import InvalidArgumentError

SAMPLES = [Fraction(3, 4), Fraction(-1, 8), Fraction(5, 2), Fraction(7, 16), Fraction(0), Fraction(9, 4)]
SAMPLE_TIME = Fraction(1, 4)


def exact_first(values, k, t):
    return (values[k] - values[k - 1]) / t


def exact_second(values, k, t):
    return (values[k] - 2 * values[k - 1] + values[k - 2]) / (t * t)


def test_first_difference_matches_rational_oracle():
    for k in range(1, len(SAMPLES)):
        expected = exact_first(SAMPLES, k, SAMPLE_TIME)
        got = bd_first(float(SAMPLES[k - 1]), float(SAMPLES[k]), float(SAMPLE_TIME))
        assert got == pytest.approx(float(expected), rel=1e-15)


def test_second_difference_matches_rational_oracle():
    for k in range(2, len(SAMPLES)):
        expected = exact_second(SAMPLES, k, SAMPLE_TIME)
        got = bd_second(float(SAMPLES[k - 2]), float(SAMPLES[k - 1]), float(SAMPLES[k]), float(SAMPLE_TIME))
        assert got == pytest.approx(float(expected), rel=1e-14)


def test_ramp_slope():
    assert bd_first(1.0, 1.5, 0.5) == 1.0
    assert bd_second(0.0, 1.0, 4.0, 1.0) == 2.0


@pytest.mark.parametrize("sample_time_s", [0.0, -1.0])
def test_non_positive_sample_time(sample_time_s):
    with pytest.raises(InvalidArgumentError):
        bd_first(0.0, 1.0, sample_time_s)
    with pytest.raises(InvalidArgumentError):
        BackwardDifferenceDifferentiator(1, sample_time_s)


def test_unsupported_order():
    with pytest.raises(InvalidArgumentError):
        BackwardDifferenceDifferentiator(3, 0.1)


@pytest.mark.parametrize("order", [1, 2])
def test_streaming_fills_up_then_matches_oracle(order):
    differentiator = BackwardDifferenceDifferentiator(order, float(SAMPLE_TIME))
    oracle = exact_first if order == 1 else exact_second
    for k, y_k in enumerate(SAMPLES):
        emission = differentiator.update(float(y_k))
        if k < order:
            assert emission is None
            continue
        assert emission.step == k
        assert emission.value == pytest.approx(float(oracle(SAMPLES, k, SAMPLE_TIME)), rel=1e-14)
    assert differentiator.delay_steps == 1


def test_run_resets_and_leaves_nan_before_first_estimate():
    differentiator = BackwardDifferenceDifferentiator(2, 1.0)
    first = differentiator.run([0.0, 1.0, 4.0, 9.0])
    second = differentiator.run([0.0, 1.0, 4.0, 9.0])
    assert np.isnan(first[:2]).all()
    np.testing.assert_array_equal(first[2:], [2.0, 2.0])
    np.testing.assert_array_equal(first, second)


@pytest.mark.parametrize("order", [1, 2])
def test_linear_in_the_signal(order):
    rng = np.random.default_rng(40 + order)
    first, second = rng.standard_normal(50), rng.standard_normal(50)
    a, b = 2.5, -0.75
    differentiator = BackwardDifferenceDifferentiator(order, 0.01)
    combined = differentiator.run(a * first + b * second)
    expected = a * differentiator.run(first) + b * differentiator.run(second)
    np.testing.assert_allclose(combined[order:], expected[order:], rtol=1e-9, atol=1e-9)
    assert np.isnan(combined[:order]).all()

# ./tests/unit/module_utils/common/test_streaming.py

import numpy as np
import pytest

from numdiff.module_utils.baselines.backward_difference import BackwardDifferenceDifferentiator
from numdiff.module_utils.baselines.high_gain_observer import HgoConfig, HighGainObserverDifferentiator
from numdiff.module_utils.baselines.savitzky_golay import SavitzkyGolayDifferentiator, SgConfig
from numdiff.module_utils.common.streaming import Differentiator, Emission


class LaggedCopy(Differentiator):
    """Echoes the sample seen two steps earlier, as the estimate of that step."""

    @property
    def delay_steps(self):
        return 2

    def _reset_state(self):
        self.seen = []

    def __init__(self):
        super().__init__()
        self._reset_state()

    def _consume(self, step, y_k):
        self.seen.append(y_k)
        if step < 2:
            return None
        return Emission(step=step - 2, value=self.seen[step - 2])


def test_update_counts_steps():
    differentiator = LaggedCopy()
    assert differentiator.update(1.0) is None
    assert differentiator.update(2.0) is None
    assert differentiator.update(3.0) == Emission(step=0, value=1.0)


def test_run_places_estimates_at_their_step():
    estimates = LaggedCopy().run([5.0, 6.0, 7.0, 8.0])
    np.testing.assert_array_equal(estimates[:2], [5.0, 6.0])
    assert np.isnan(estimates[2:]).all()


def test_run_starts_from_a_fresh_state():
    differentiator = LaggedCopy()
    for y_k in (9.0, 9.0, 9.0):
        differentiator.update(y_k)
    first = differentiator.run([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(first[:1], [1.0])
    assert differentiator.seen == [1.0, 2.0, 3.0]


def test_empty_run():
    assert LaggedCopy().run([]).shape == (0,)


@pytest.mark.parametrize("differentiator", [
    BackwardDifferenceDifferentiator(2, 0.01),
    SavitzkyGolayDifferentiator(SgConfig(half_window=3, poly_degree=3, derivative_order=1, sample_time_s=0.01)),
    HighGainObserverDifferentiator(HgoConfig(order=2, alphas=(2.0, 1.0), epsilon=0.2, sample_time_s=0.01), 1),
], ids=["bd", "sg", "hgo"])
def test_prefix_runs_agree_with_full_run(differentiator):
    values = np.random.default_rng(17).standard_normal(60)
    full = differentiator.run(values)
    for size in (1, 5, 13, 40, 60):
        prefix = differentiator.run(values[:size])
        known = np.isfinite(prefix)
        np.testing.assert_array_equal(prefix[known], full[:size][known])
        assert np.isfinite(full[:size][known]).all()

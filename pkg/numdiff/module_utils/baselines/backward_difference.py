# ./numdiff/module_utils/baselines/backward_difference.py

from __future__ import annotations

from typing import Optional

from numdiff.module_utils.common.errors import InvalidArgumentError
from numdiff.module_utils.common.streaming import Differentiator, Emission


def _check_sample_time(sample_time_s: float) -> None:
    if not sample_time_s > 0:
        raise InvalidArgumentError(f"sample_time_s must be positive, got {sample_time_s}")


def bd_first(prev_y: float, curr_y: float, sample_time_s: float) -> float:
    """Backward-difference single differentiator (y_k - y_{k-1}) / T_s."""
    _check_sample_time(sample_time_s)
    return (curr_y - prev_y) / sample_time_s


def bd_second(y_km2: float, y_km1: float, y_k: float, sample_time_s: float) -> float:
    """Backward-difference double differentiator (y_k - 2 y_{k-1} + y_{k-2}) / T_s^2."""
    _check_sample_time(sample_time_s)
    return (y_k - 2.0 * y_km1 + y_km2) / sample_time_s ** 2


class BackwardDifferenceDifferentiator(Differentiator):
    """
    Causal backward-difference differentiator of order q in {1, 2}.

    The estimate of y^{(q)}_k uses y_k ... y_{k-q}; the first one is produced
    once q + 1 samples have been seen.
    """

    def __init__(self, derivative_order: int, sample_time_s: float):
        """
        Args:
            derivative_order: q, 1 or 2
            sample_time_s: T_s
        """
        super().__init__()
        if derivative_order not in (1, 2):
            raise InvalidArgumentError(
                f"backward difference supports q = 1 or 2, got {derivative_order}")
        _check_sample_time(sample_time_s)
        self.derivative_order = derivative_order
        self.sample_time_s = sample_time_s
        self._history = []

    @property
    def delay_steps(self) -> int:
        return 1

    def _reset_state(self) -> None:
        self._history = []

    def _consume(self, step: int, y_k: float) -> Optional[Emission]:
        self._history.append(y_k)
        if len(self._history) > self.derivative_order + 1:
            self._history.pop(0)
        if len(self._history) < self.derivative_order + 1:
            return None
        if self.derivative_order == 1:
            value = bd_first(self._history[0], self._history[1], self.sample_time_s)
        else:
            value = bd_second(*self._history, self.sample_time_s)
        return Emission(step=step, value=value)

# ./numdiff/module_utils/common/streaming.py

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Emission:
    """
    One derivative estimate produced by a streaming differentiator

    Attributes:
        step: Step k whose derivative is estimated
        value: Estimate of y^{(q)}_k
        residual: Kalman residual z_k for estimators that have one
    """
    step: int
    value: float
    residual: Optional[float] = None


class Differentiator(ABC):
    """
    Single-owner streaming state machine turning samples y_k into estimates.

    `delay_steps` is the delta of the error metric: the estimate of step k is
    available at step k + delay_steps.
    """

    derivative_order: int = 1

    def __init__(self):
        self._step = 0

    @property
    @abstractmethod
    def delay_steps(self) -> int:
        """Delay in steps between a sample and the availability of its estimate."""

    @abstractmethod
    def _consume(self, step: int, y_k: float) -> Optional[Emission]:
        """Process sample `y_k` taken at `step`."""

    def _reset_state(self) -> None:
        """Hook for subclasses holding extra state."""

    def update(self, y_k: float) -> Optional[Emission]:
        """
        Feed the next sample

        Args:
            y_k: Sample at the current step

        Returns:
            Emission or None while the differentiator is still filling up
        """
        emission = self._consume(self._step, float(y_k))
        self._step += 1
        return emission

    def reset(self) -> None:
        """Return to the initial state."""
        self._step = 0
        self._reset_state()

    def run(self, values: Sequence[float]) -> np.ndarray:
        """
        Differentiate a whole series from a fresh state

        Args:
            values: Samples y_0 ... y_{N-1}

        Returns:
            Array of length N whose entry k estimates y^{(q)}_k (NaN where no
            estimate exists)
        """
        self.reset()
        values = np.asarray(values, dtype=float)
        estimates = np.full(values.shape[0], np.nan)
        for y_k in values:
            emission = self.update(y_k)
            if emission is not None and 0 <= emission.step < estimates.shape[0]:
                estimates[emission.step] = emission.value
        return estimates

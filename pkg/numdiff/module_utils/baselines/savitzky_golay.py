# ./numdiff/module_utils/baselines/savitzky_golay.py

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import perm

from numdiff.module_utils.common.errors import InvalidArgumentError, NumericalError
from numdiff.module_utils.common.streaming import Differentiator, Emission


@dataclass(frozen=True)
class SgConfig:
    """
    Savitzky-Golay differentiation settings

    Attributes:
        half_window: l, the window holds 2l + 1 samples
        poly_degree: p_d, degree of the fitted polynomial
        derivative_order: q
        sample_time_s: T_s
    """
    half_window: int
    poly_degree: int
    derivative_order: int
    sample_time_s: float = 1.0

    def __post_init__(self):
        if self.half_window < 1:
            raise InvalidArgumentError(f"half_window must be >= 1, got {self.half_window}")
        if self.derivative_order not in (1, 2):
            raise InvalidArgumentError(
                f"derivative_order must be 1 or 2, got {self.derivative_order}")
        if not self.derivative_order <= self.poly_degree <= 2 * self.half_window:
            raise InvalidArgumentError(
                f"need q <= p_d <= 2l, got q={self.derivative_order}, "
                f"p_d={self.poly_degree}, l={self.half_window}")
        if not self.sample_time_s > 0:
            raise InvalidArgumentError(
                f"sample_time_s must be positive, got {self.sample_time_s}")

    @property
    def window_length(self) -> int:
        return 2 * self.half_window + 1


def _factorize(abscissae: np.ndarray, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    design = np.vander(abscissae, degree + 1, increasing=True)
    q_factor, r_factor = np.linalg.qr(design)
    diagonal = np.abs(np.diag(r_factor))
    if diagonal.min() <= np.finfo(float).eps * diagonal.max() * design.shape[0]:
        raise NumericalError("Savitzky-Golay design matrix is rank deficient")
    return q_factor, r_factor


def falling_factorial(i: int, q: int) -> float:
    """Q_{i,q} = i (i - 1) ... (i - q + 1)."""
    return float(perm(i, q, exact=True))


def evaluate_derivative(coefficients: Sequence[float], derivative_order: int, at: float) -> float:
    """q-th derivative of sum_i a_i s^i evaluated at s = `at`."""
    return float(sum(
        falling_factorial(i, derivative_order) * coefficients[i] * at ** (i - derivative_order)
        for i in range(derivative_order, len(coefficients))
    ))


def sg_estimate(window: Sequence[float], center_step: int, config: SgConfig,
                centered: bool = True) -> float:
    """
    Least-squares polynomial fit over one window and its q-th derivative at the centre

    With `centered` the abscissae are the offsets -l ... l (scaled by T_s
    afterwards) and the derivative is read at the origin; otherwise the
    absolute abscissae (k - l) T_s ... (k + l) T_s are used. Both give the same
    estimate up to rounding, the centred form is well conditioned for any k.

    Args:
        window: y_{k-l} ... y_{k+l}
        center_step: k
        config: SgConfig

    Returns:
        Estimate of y^{(q)}_k
    """
    window = np.asarray(window, dtype=float)
    if window.shape != (config.window_length,):
        raise InvalidArgumentError(
            f"window must hold {config.window_length} samples, got {window.shape[0]}")
    offsets = np.arange(-config.half_window, config.half_window + 1, dtype=float)
    q = config.derivative_order
    if centered:
        q_factor, r_factor = _factorize(offsets, config.poly_degree)
        coefficients = solve_triangular(r_factor, q_factor.T @ window)
        return evaluate_derivative(coefficients, q, 0.0) / config.sample_time_s ** q

    abscissae = (center_step + offsets) * config.sample_time_s
    q_factor, r_factor = _factorize(abscissae, config.poly_degree)
    coefficients = solve_triangular(r_factor, q_factor.T @ window)
    return evaluate_derivative(coefficients, q, center_step * config.sample_time_s)


def sg_coefficients(config: SgConfig) -> np.ndarray:
    """
    Window weights w with y^{(q)}_k estimate = w . [y_{k-l} ... y_{k+l}]

    Args:
        config: SgConfig

    Returns:
        Array of 2l + 1 weights
    """
    offsets = np.arange(-config.half_window, config.half_window + 1, dtype=float)
    q_factor, r_factor = _factorize(offsets, config.poly_degree)
    pseudo_inverse = solve_triangular(r_factor, q_factor.T)
    q = config.derivative_order
    return falling_factorial(q, q) * pseudo_inverse[q] / config.sample_time_s ** q


class SavitzkyGolayDifferentiator(Differentiator):
    """
    Streaming SG differentiator.

    Buffers 2l + 1 samples; the estimate of step k is computed once y_{k+l}
    arrives, so it is available with delay l + 1 and nothing is produced for
    the first 2l steps.
    """

    def __init__(self, config: SgConfig):
        super().__init__()
        self.config = config
        self.derivative_order = config.derivative_order
        self.weights = sg_coefficients(config)
        self._window = deque(maxlen=config.window_length)

    @property
    def delay_steps(self) -> int:
        return self.config.half_window + 1

    def _reset_state(self) -> None:
        self._window.clear()

    def _consume(self, step: int, y_k: float) -> Optional[Emission]:
        self._window.append(y_k)
        if len(self._window) < self.config.window_length:
            return None
        value = float(self.weights @ np.fromiter(self._window, dtype=float))
        return Emission(step=step - self.config.half_window, value=value)

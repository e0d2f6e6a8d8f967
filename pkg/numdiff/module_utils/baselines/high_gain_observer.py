# ./numdiff/module_utils/baselines/high_gain_observer.py

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.signal import cont2discrete

from numdiff.module_utils.common.errors import InvalidArgumentError
from numdiff.module_utils.common.streaming import Differentiator, Emission


@dataclass(frozen=True)
class HgoConfig:
    """
    r-th order high-gain observer settings

    Attributes:
        order: r >= 2
        alphas: alpha_1 ... alpha_r, s^r + alpha_1 s^{r-1} + ... + alpha_r must be Hurwitz
        epsilon: Gain parameter, smaller is faster
        sample_time_s: T_s used by the bilinear discretisation
    """
    order: int
    alphas: Tuple[float, ...]
    epsilon: float
    sample_time_s: float

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.order < 2:
            raise InvalidArgumentError(f"observer order must be >= 2, got {self.order}")
        if len(self.alphas) != self.order:
            raise InvalidArgumentError(
                f"expected {self.order} alphas, got {len(self.alphas)}")
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}")
        if not self.sample_time_s > 0:
            raise InvalidArgumentError(
                f"sample_time_s must be positive, got {self.sample_time_s}")
        if not is_hurwitz((1.0,) + self.alphas):
            raise InvalidArgumentError(
                f"s^r + alpha_1 s^(r-1) + ... + alpha_r is not Hurwitz for alphas {self.alphas}")


def is_hurwitz(coefficients: Sequence[float]) -> bool:
    """True when every root of the polynomial lies in the open left half-plane."""
    roots = np.roots(np.asarray(coefficients, dtype=float))
    return bool(np.all(roots.real < 0))


def continuous_observer(config: HgoConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Continuous-time observer matrices

    Returns:
        (A_co, B_co) with A_co = shift - H e_1^T and B_co = H = [alpha_i / epsilon^i]
    """
    r = config.order
    gain = np.array([alpha / config.epsilon ** (i + 1)
                     for i, alpha in enumerate(config.alphas)]).reshape(r, 1)
    shift = np.eye(r, k=1)
    a_co = shift - gain @ np.eye(1, r)
    return a_co, gain


@dataclass
class HgoState:
    """
    Discrete-time observer x_{k+1} = A_do x_k + B_do y_k, y_hat_k = C_o x_k

    Attributes:
        A_do: r x r
        B_do: r x 1
        C_o: (r - 1) x r selector of the derivative components
        x_hat: Observer state
    """
    A_do: np.ndarray
    B_do: np.ndarray
    C_o: np.ndarray
    x_hat: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.x_hat is None:
            self.x_hat = np.zeros(self.A_do.shape[0])

    @classmethod
    def from_config(cls, config: HgoConfig) -> "HgoState":
        """
        Bilinear discretisation of the continuous observer, zero initial state

        Raises:
            InvalidArgumentError: If I - T_s/2 A_co is singular
        """
        a_co, b_co = continuous_observer(config)
        r = config.order
        pencil = np.eye(r) - 0.5 * config.sample_time_s * a_co
        if np.linalg.matrix_rank(pencil) < r:
            raise InvalidArgumentError("I - T_s/2 A_co is singular, cannot discretise")
        c_full = np.eye(r)
        a_do, b_do, _, _, _ = cont2discrete(
            (a_co, b_co, c_full, np.zeros((r, 1))), config.sample_time_s, method="bilinear")
        c_o = np.eye(r)[1:]
        return cls(A_do=a_do, B_do=b_do, C_o=c_o)

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.A_do))))


def hgo_step(state: HgoState, y_k: float) -> Tuple[HgoState, np.ndarray]:
    """
    Advance the observer by one sample

    Args:
        state: Current observer
        y_k: Sample at step k

    Returns:
        (next state, y_hat_k = C_o x_hat_k) where entry i - 1 estimates y^{(i)}_k
    """
    estimates = state.C_o @ state.x_hat
    x_next = state.A_do @ state.x_hat + state.B_do[:, 0] * y_k
    return HgoState(A_do=state.A_do, B_do=state.B_do, C_o=state.C_o, x_hat=x_next), estimates


class HighGainObserverDifferentiator(Differentiator):
    """Streaming HGO differentiator reporting the q-th derivative component."""

    def __init__(self, config: HgoConfig, derivative_order: int):
        super().__init__()
        if not 1 <= derivative_order <= config.order - 1:
            raise InvalidArgumentError(
                f"an order-{config.order} observer estimates q = 1 ... {config.order - 1}, "
                f"got q={derivative_order}")
        self.config = config
        self.derivative_order = derivative_order
        self._initial = HgoState.from_config(config)
        self.state = self._initial

    @property
    def delay_steps(self) -> int:
        return 1

    def _reset_state(self) -> None:
        self.state = self._initial

    def _consume(self, step: int, y_k: float) -> Optional[Emission]:
        self.state, estimates = hgo_step(self.state, y_k)
        return Emission(step=step, value=float(estimates[self.derivative_order - 1]))

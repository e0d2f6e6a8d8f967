# ./numdiff/module_utils/estimation/askf.py

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Tuple, Union

import numpy as np

from numdiff.module_utils.common.errors import DegenerateFilterError, InvalidArgumentError

GRID_SCALES = ("linear", "logarithmic")


@dataclass(frozen=True)
class StateSpaceModel:
    """
    Discrete-time integrator x_{k+1} = A x_k + B d_k, y_k = C x_k

    Attributes:
        A: n x n
        B: n x 1
        C: 1 x n
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = a.shape[0]
        if a.shape != (n, n):
            raise InvalidArgumentError(f"A must be square, got {a.shape}")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float).reshape(n, 1))
        object.__setattr__(self, "C", np.asarray(self.C, dtype=float).reshape(1, n))

    @property
    def n(self) -> int:
        return self.A.shape[0]


def model_for_order(derivative_order: int, sample_time_s: float) -> StateSpaceModel:
    """
    Integrator chain whose unknown input is the q-th derivative of the output

    Args:
        derivative_order: 1 for the single integrator, 2 for the double
        sample_time_s: T_s

    Returns:
        StateSpaceModel
    """
    if not sample_time_s > 0:
        raise InvalidArgumentError(f"sample_time_s must be positive, got {sample_time_s}")
    t = sample_time_s
    if derivative_order == 1:
        return StateSpaceModel(A=[[1.0]], B=[[t]], C=[[1.0]])
    if derivative_order == 2:
        return StateSpaceModel(A=[[1.0, t], [0.0, 1.0]], B=[[t * t / 2.0], [t]], C=[[1.0, 0.0]])
    raise InvalidArgumentError(f"derivative_order must be 1 or 2, got {derivative_order}")


@dataclass
class ResidualStatistics:
    """
    Running mean and variance of the residuals z_0 ... z_k

    The mean divides by k + 1 and the variance by k.
    """
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, z_k: float) -> "ResidualStatistics":
        count = self.count + 1
        delta = z_k - self.mean
        mean = self.mean + delta / count
        m2 = self.m2 + delta * (z_k - mean)
        return ResidualStatistics(count=count, mean=mean, m2=m2)

    @property
    def sample_variance(self) -> float:
        """S_hat_k, zero until two residuals are known."""
        if self.count < 2:
            return 0.0
        return self.m2 / (self.count - 1)


@dataclass
class KfState:
    """
    Forecast and data-assimilation quantities of the state estimator

    Attributes:
        x_fc: Forecast state x_fc,k
        x_da: Assimilated state x_da,k
        P_f: Forecast covariance
        P_da: Assimilated covariance
        K_da: Gain
        residuals: Running residual statistics
    """
    x_fc: np.ndarray
    x_da: np.ndarray
    P_f: np.ndarray
    P_da: np.ndarray
    K_da: np.ndarray
    residuals: ResidualStatistics = field(default_factory=ResidualStatistics)

    @classmethod
    def initial(cls, model: StateSpaceModel) -> "KfState":
        n = model.n
        return cls(x_fc=np.zeros(n), x_da=np.zeros(n), P_f=np.zeros((n, n)),
                   P_da=np.zeros((n, n)), K_da=np.zeros(n))

    @property
    def residual_count(self) -> int:
        return self.residuals.count

    @property
    def residual_mean(self) -> float:
        return self.residuals.mean

    @property
    def residual_m2(self) -> float:
        return self.residuals.m2


def _as_covariance(V1, n: int) -> np.ndarray:
    v1 = np.asarray(V1, dtype=float)
    if v1.ndim == 0:
        v1 = float(v1) * np.eye(n)
    if v1.shape != (n, n):
        raise InvalidArgumentError(f"V1 must be {n}x{n}, got {v1.shape}")
    return v1


def kf_forecast(state: KfState, model: StateSpaceModel, dhat_k: float, V1) -> KfState:
    """
    Forecast step

    x_fc,k+1 = A x_da,k + B d_hat_k and P_f,k+1 = A P_da,k A^T + V1

    Args:
        state: State after assimilation of step k
        model: StateSpaceModel
        dhat_k: Input estimate of step k
        V1: n x n process covariance, or a scalar standing for scalar * I

    Returns:
        KfState holding the forecast of step k + 1
    """
    v1 = _as_covariance(V1, model.n)
    x_fc = model.A @ state.x_da + model.B[:, 0] * dhat_k
    P_f = model.A @ state.P_da @ model.A.T + v1
    return replace(state, x_fc=x_fc, P_f=0.5 * (P_f + P_f.T))


def kf_residual(state: KfState, model: StateSpaceModel, y_k: float,
                record: bool = True) -> Tuple[KfState, float]:
    """
    Residual z_k = C x_fc,k - y_k

    Args:
        state: Forecast of step k
        model: StateSpaceModel
        y_k: Measurement
        record: Add z_k to the running residual statistics

    Returns:
        (state, z_k)
    """
    z_k = float((model.C @ state.x_fc).item() - y_k)
    if not record:
        return state, z_k
    return replace(state, residuals=state.residuals.update(z_k)), z_k


def innovation_variance(state: KfState, model: StateSpaceModel, V2: float) -> float:
    """S_k = C P_f,k C^T + V2."""
    return float((model.C @ state.P_f @ model.C.T).item() + V2)


def has_zero_uncertainty(state: KfState, model: StateSpaceModel, V2: float) -> bool:
    """True when P_f is identically zero and the innovation variance vanishes."""
    return not np.any(state.P_f) and innovation_variance(state, model, V2) == 0.0


def hold_forecast(state: KfState) -> KfState:
    """Assimilate nothing: K_da = 0, x_da = x_fc, P_da = P_f."""
    return replace(state, K_da=np.zeros_like(state.K_da), x_da=state.x_fc.copy(),
                   P_da=state.P_f.copy())


def kf_assimilate(state: KfState, model: StateSpaceModel, z_k: float, V2: float) -> KfState:
    """
    Data-assimilation step

    K_da = -P_f C^T (C P_f C^T + V2)^-1, P_da = (I + K_da C) P_f, x_da = x_fc + K_da z_k

    Raises:
        InvalidArgumentError: If V2 is negative
        DegenerateFilterError: If C P_f C^T + V2 is not positive
    """
    if V2 < 0:
        raise InvalidArgumentError(f"V2 must be >= 0, got {V2}")
    s_k = innovation_variance(state, model, V2)
    if not s_k > 0:
        raise DegenerateFilterError(f"innovation variance C P_f C^T + V2 = {s_k} is not positive")
    gain = -(state.P_f @ model.C.T)[:, 0] / s_k
    closed = np.eye(model.n) + np.outer(gain, model.C[0])
    P_da = closed @ state.P_f
    return replace(state, K_da=gain, x_da=state.x_fc + gain * z_k, P_da=0.5 * (P_da + P_da.T))


def closed_loop_matrix(state: KfState, model: StateSpaceModel) -> np.ndarray:
    """Abar_k = A (I + K_da,k C)."""
    return model.A @ (np.eye(model.n) + np.outer(state.K_da, model.C[0]))


@dataclass(frozen=True)
class AdaptConfig:
    """
    Grid search over V1 = eta I_n

    Attributes:
        eta_lower: eta_L >= 0
        eta_upper: eta_U > eta_L
        grid_points: w, the grid holds w + 1 values
        grid_scale: linear or logarithmic spacing
        alpha: Weight of min against max in the target J_hat_f
    """
    eta_lower: float
    eta_upper: float
    grid_points: int = 100
    grid_scale: str = "logarithmic"
    alpha: float = 0.5

    def __post_init__(self):
        if not 0 <= self.eta_lower < self.eta_upper:
            raise InvalidArgumentError(
                f"need 0 <= eta_lower < eta_upper, got [{self.eta_lower}, {self.eta_upper}]")
        if self.grid_points < 1:
            raise InvalidArgumentError(f"grid_points must be >= 1, got {self.grid_points}")
        if self.grid_scale not in GRID_SCALES:
            raise InvalidArgumentError(
                f"grid_scale must be one of {', '.join(GRID_SCALES)}, got {self.grid_scale!r}")
        if self.grid_scale == "logarithmic" and self.eta_lower == 0:
            raise InvalidArgumentError("a logarithmic grid needs eta_lower > 0")
        if not 0 <= self.alpha <= 1:
            raise InvalidArgumentError(f"alpha must lie in [0, 1], got {self.alpha}")


def eta_grid(config: AdaptConfig) -> np.ndarray:
    """Increasing grid eta_0 = eta_L ... eta_w = eta_U."""
    if config.grid_scale == "logarithmic":
        return np.geomspace(config.eta_lower, config.eta_upper, config.grid_points + 1)
    steps = np.arange(config.grid_points + 1)
    return config.eta_lower + steps * (config.eta_upper - config.eta_lower) / config.grid_points


def forecast_criterion(state: KfState, model: StateSpaceModel, S_hat: float,
                       etas: np.ndarray) -> np.ndarray:
    """
    J_f(eta I_n) = S_hat - C (A P_da A^T + eta I_n) C^T for every candidate

    Affine and strictly decreasing in eta with slope -C C^T.
    """
    if np.size(etas) == 0:
        raise InvalidArgumentError("eta grid is empty")
    c = model.C
    base = float((c @ model.A @ state.P_da @ model.A.T @ c.T).item())
    slope = float((c @ c.T).item())
    return S_hat - base - np.asarray(etas, dtype=float) * slope


def candidate_covariances(state: KfState, model: StateSpaceModel, etas: np.ndarray) -> np.ndarray:
    """P~_f(eta) = A P_da A^T + eta I_n for every candidate, stacked along the first axis."""
    etas = np.asarray(etas, dtype=float)
    if etas.size == 0:
        raise InvalidArgumentError("eta grid is empty")
    base = model.A @ state.P_da @ model.A.T
    return base[np.newaxis, :, :] + etas[:, np.newaxis, np.newaxis] * np.eye(model.n)


def adaptation_metric(S_hat: float, P_f_candidate: np.ndarray, model: StateSpaceModel,
                      V2: float) -> Union[float, np.ndarray]:
    """
    J = |S_hat - (C P_f C^T + V2)|

    Args:
        S_hat: Residual sample variance
        P_f_candidate: n x n forecast covariance, or a stack of them
        model: StateSpaceModel
        V2: Sensor covariance

    Returns:
        float for one covariance, an array with one value per covariance for a stack
    """
    if S_hat < 0:
        raise InvalidArgumentError(f"S_hat must be >= 0, got {S_hat}")
    c = model.C[0]
    candidates = np.asarray(P_f_candidate, dtype=float)
    innovation = np.einsum("i,...ij,j->...", c, candidates, c) + V2
    metric = np.abs(S_hat - innovation)
    return float(metric) if metric.ndim == 0 else metric


def adapt_covariances(state: KfState, model: StateSpaceModel, S_hat: float,
                      config: AdaptConfig) -> Tuple[np.ndarray, float]:
    """
    Choose V1 = eta* I_n and V2 from the residual variance

    When some grid value gives J_f > 0, eta* brings J_f closest to
    alpha min + (1 - alpha) max of the positive values and V2 = J_f(eta*).
    Otherwise V2 = 0 and eta* minimises the adaptation metric, which is then
    |J_f|. Ties go to the smallest eta.

    Args:
        state: Holds P_da,k-1
        model: StateSpaceModel
        S_hat: Residual sample variance S_hat_k
        config: AdaptConfig

    Returns:
        (V1, V2)
    """
    etas = eta_grid(config)
    j_f = forecast_criterion(state, model, S_hat, etas)
    positive = j_f > 0
    if np.any(positive):
        target = config.alpha * j_f[positive].min() + (1.0 - config.alpha) * j_f[positive].max()
        index = int(np.argmin(np.where(positive, np.abs(j_f - target), np.inf)))
        return etas[index] * np.eye(model.n), float(j_f[index])
    metric = adaptation_metric(S_hat, candidate_covariances(state, model, etas), model, 0.0)
    index = int(np.argmin(metric))
    return etas[index] * np.eye(model.n), 0.0


def sse_select(state: KfState, model: StateSpaceModel, S_hat: float, config: AdaptConfig,
               V2_true: float) -> Tuple[np.ndarray, float]:
    """
    V1 = eta* I_n minimising the adaptation metric with V2 pinned to V2_true

    Returns:
        (V1, V2_true)
    """
    etas = eta_grid(config)
    metric = adaptation_metric(S_hat, candidate_covariances(state, model, etas), model, V2_true)
    index = int(np.argmin(metric))
    return etas[index] * np.eye(model.n), float(V2_true)

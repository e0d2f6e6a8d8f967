# ./numdiff/module_utils/estimation/estimator.py

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from numdiff.module_utils.common.errors import InvalidArgumentError
from numdiff.module_utils.common.streaming import Differentiator, Emission
from numdiff.module_utils.estimation.askf import (
    AdaptConfig,
    KfState,
    StateSpaceModel,
    adapt_covariances,
    closed_loop_matrix,
    has_zero_uncertainty,
    hold_forecast,
    kf_assimilate,
    kf_forecast,
    kf_residual,
    model_for_order,
    sse_select,
)
from numdiff.module_utils.estimation.rcie import RcieConfig, RcieSubsystem
from numdiff.module_utils.signals.signal_utils import SampledSignal

MODES = ("NSE", "SSE", "ASE")

Covariances = Tuple[np.ndarray, float]


@dataclass(frozen=True)
class AieVariant:
    """
    How the estimator chooses V1 and V2

    NSE keeps fixed_V1 and fixed_V2. SSE keeps fixed_V2 and searches V1 over
    the adapt grid. ASE searches both.

    Attributes:
        mode: NSE, SSE or ASE
        fixed_V1: n x n covariance or a scalar standing for scalar * I (NSE)
        fixed_V2: Sensor covariance (NSE, SSE)
        adapt: AdaptConfig (SSE, ASE)
    """
    mode: str
    fixed_V1: Optional[Union[float, np.ndarray]] = None
    fixed_V2: Optional[float] = None
    adapt: Optional[AdaptConfig] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        missing = []
        if self.mode == "NSE":
            missing = [name for name in ("fixed_V1", "fixed_V2") if getattr(self, name) is None]
        elif self.mode == "SSE":
            missing = [name for name in ("adapt", "fixed_V2") if getattr(self, name) is None]
        elif self.adapt is None:
            missing = ["adapt"]
        if missing:
            raise InvalidArgumentError(f"AIE/{self.mode} requires {', '.join(missing)}")
        if self.fixed_V2 is not None and self.fixed_V2 < 0:
            raise InvalidArgumentError(f"fixed_V2 must be >= 0, got {self.fixed_V2}")


@dataclass(frozen=True)
class EstimatorOutput:
    """
    Result of one estimator step

    Attributes:
        d_hat: Estimate of the q-th derivative, available one step later
        x_da: Assimilated state
        z: Residual
        V1_used: Process covariance chosen at this step
        V2_used: Sensor covariance chosen at this step
        delay_steps: Always 1
    """
    d_hat: float
    x_da: np.ndarray
    z: float
    V1_used: np.ndarray
    V2_used: float
    delay_steps: int = 1


class CovarianceSelector(ABC):
    """Chooses (V1, V2) for step k from the filter state and S_hat_k."""

    @abstractmethod
    def select(self, step: int, state: KfState, model: StateSpaceModel, S_hat: float) -> Covariances:
        pass


class FixedCovariances(CovarianceSelector):
    def __init__(self, V1, V2: float, n: int):
        v1 = np.asarray(V1, dtype=float)
        self.V1 = float(v1) * np.eye(n) if v1.ndim == 0 else v1
        if self.V1.shape != (n, n):
            raise InvalidArgumentError(f"V1 must be {n}x{n}, got {self.V1.shape}")
        self.V2 = float(V2)

    def select(self, step, state, model, S_hat):
        return self.V1, self.V2


class SemiAdaptiveCovariances(CovarianceSelector):
    """V2 pinned to a known value, V1 searched from step 1 on."""

    def __init__(self, config: AdaptConfig, V2: float, n: int):
        self.config = config
        self.V2 = float(V2)
        self.n = n

    def select(self, step, state, model, S_hat):
        if step < 1:
            return np.zeros((self.n, self.n)), self.V2
        return sse_select(state, model, S_hat, self.config, self.V2)


class AdaptiveCovariances(CovarianceSelector):
    """Both covariances searched from step 1 on; zero before."""

    def __init__(self, config: AdaptConfig, n: int):
        self.config = config
        self.n = n

    def select(self, step, state, model, S_hat):
        if step < 1:
            return np.zeros((self.n, self.n)), 0.0
        return adapt_covariances(state, model, S_hat, self.config)


def selector_for(variant: AieVariant, n: int) -> CovarianceSelector:
    if variant.mode == "NSE":
        return FixedCovariances(variant.fixed_V1, variant.fixed_V2, n)
    if variant.mode == "SSE":
        return SemiAdaptiveCovariances(variant.adapt, variant.fixed_V2, n)
    return AdaptiveCovariances(variant.adapt, n)


class AdaptiveInputEstimator:
    """
    Adaptive input estimation of the q-th derivative of a sampled signal.

    Each step computes the residual, the input estimate and RLS update, the
    covariances for the variant, the data assimilation and the forecast of
    the next step, in that order. The residual statistics behind S_hat start
    at the first step with an input estimate.
    """

    def __init__(self, model: StateSpaceModel, rcie_config: RcieConfig, variant: AieVariant,
                 selector: Optional[CovarianceSelector] = None):
        """
        Args:
            model: Integrator model, see `model_for_order`
            rcie_config: Input-estimation settings
            variant: NSE, SSE or ASE settings
            selector: Replaces the covariance selection of the variant
        """
        self.model = model
        self.rcie_config = rcie_config
        self.variant = variant
        self.selector = selector or selector_for(variant, model.n)
        self.rcie = RcieSubsystem(rcie_config, model.B, model.C)
        self.kf = KfState.initial(model)
        self.k = 0

    def reset(self) -> None:
        self.rcie.reset()
        self.kf = KfState.initial(self.model)
        self.k = 0

    def step(self, y_k: float) -> EstimatorOutput:
        """
        Process one sample

        Args:
            y_k: Measurement at the current step

        Returns:
            EstimatorOutput of the current step
        """
        # residuals enter S_hat once the input estimator is running
        kf, z_k = kf_residual(self.kf, self.model, y_k,
                              record=self.k >= self.rcie.state.start_step)
        d_hat = self.rcie.estimate(z_k)

        V1, V2 = self.selector.select(self.k, kf, self.model, kf.residuals.sample_variance)
        if has_zero_uncertainty(kf, self.model, V2):
            kf = hold_forecast(kf)
        else:
            kf = kf_assimilate(kf, self.model, z_k, V2)
        self.rcie.push_closed_loop(closed_loop_matrix(kf, self.model))

        output = EstimatorOutput(d_hat=d_hat, x_da=kf.x_da.copy(), z=z_k,
                                 V1_used=np.array(V1, dtype=float), V2_used=float(V2))
        self.kf = kf_forecast(kf, self.model, d_hat, V1)
        self.k += 1
        return output

    def run(self, signal: Union[SampledSignal, Sequence[float]]) -> List[EstimatorOutput]:
        """Fold `step` over every sample from a fresh state."""
        values = signal.values if isinstance(signal, SampledSignal) else np.asarray(signal, dtype=float)
        if len(values) == 0:
            raise InvalidArgumentError("signal is empty")
        self.reset()
        return [self.step(y_k) for y_k in values]


class AieDifferentiator(Differentiator):
    """`Differentiator` view of an AdaptiveInputEstimator; keeps every output for traces."""

    def __init__(self, estimator: AdaptiveInputEstimator, derivative_order: int):
        super().__init__()
        self.estimator = estimator
        self.derivative_order = derivative_order
        self.outputs: List[EstimatorOutput] = []

    @property
    def delay_steps(self) -> int:
        return 1

    def _reset_state(self) -> None:
        self.estimator.reset()
        self.outputs = []

    def _consume(self, step: int, y_k: float) -> Optional[Emission]:
        output = self.estimator.step(y_k)
        self.outputs.append(output)
        return Emission(step=step, value=output.d_hat, residual=output.z)


@dataclass(frozen=True)
class AiePreset:
    """
    Parameter set of one AIE differentiator, published (see PRESETS) or
    assembled from an algorithm record.

    V1 is needed by NSE only and the eta bounds by SSE and ASE. V2 is the
    sensor covariance the published set was tuned for; runs on noisy signals
    usually pass their own.
    """
    derivative_order: int
    n_e: int
    n_f: int
    R_z: float = 1.0
    R_d: float = 1e-5
    R_theta: float = 0.1
    V1: Optional[float] = None
    V2: Optional[float] = None
    eta_lower: Optional[float] = None
    eta_upper: Optional[float] = None
    normalize_input: bool = True

    @classmethod
    def from_record(cls, params: Dict[str, Any], derivative_order: int) -> "AiePreset":
        """
        Parameter set from the resolved fields of an algorithm record

        Raises:
            InvalidArgumentError: If n_e or n_f is missing
        """
        if params.get("n_e") is None or params.get("n_f") is None:
            raise InvalidArgumentError("AIE requires n_e and n_f")
        optional = {field: params[key] for key, field in RECORD_FIELDS.items()
                    if key not in ("n_e", "n_f") and params.get(key) is not None}
        return cls(derivative_order=derivative_order, n_e=params["n_e"], n_f=params["n_f"], **optional)

    def record_fields(self) -> Dict[str, Any]:
        """Algorithm-record fields of this set, the base a record's explicit fields override."""
        return {key: getattr(self, field) for key, field in RECORD_FIELDS.items()
                if getattr(self, field) is not None}

    def rcie_config(self) -> RcieConfig:
        return RcieConfig(n_e=self.n_e, n_f=self.n_f, R_z=self.R_z, R_d=self.R_d,
                          R_theta=self.R_theta, normalize_input=self.normalize_input)

    def adapt_config(self, grid_points: int = 100, grid_scale: str = "logarithmic",
                     alpha: float = 0.5) -> AdaptConfig:
        if self.eta_lower is None or self.eta_upper is None:
            raise InvalidArgumentError("covariance adaptation requires eta_lower and eta_upper")
        return AdaptConfig(eta_lower=self.eta_lower, eta_upper=self.eta_upper,
                           grid_points=grid_points, grid_scale=grid_scale, alpha=alpha)

    def variant(self, mode: str, V2: Optional[float] = None, **adapt_kwargs) -> AieVariant:
        """
        Variant built from the preset

        Args:
            mode: NSE, SSE or ASE
            V2: Sensor covariance for NSE/SSE, the preset value by default
        """
        v2 = self.V2 if V2 is None else V2
        if mode == "NSE":
            return AieVariant(mode=mode, fixed_V1=self.V1, fixed_V2=v2)
        if mode == "SSE":
            return AieVariant(mode=mode, fixed_V2=v2, adapt=self.adapt_config(**adapt_kwargs))
        if mode == "ASE":
            return AieVariant(mode=mode, adapt=self.adapt_config(**adapt_kwargs))
        raise InvalidArgumentError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")

    def build(self, mode: str, sample_time_s: float, V2: Optional[float] = None,
              **adapt_kwargs) -> AdaptiveInputEstimator:
        return AdaptiveInputEstimator(model_for_order(self.derivative_order, sample_time_s),
                                      self.rcie_config(), self.variant(mode, V2, **adapt_kwargs))


# algorithm-record key -> AiePreset field
RECORD_FIELDS = dict(n_e="n_e", n_f="n_f", R_z="R_z", R_d="R_d", R_theta="R_theta", v1="V1",
                     eta_lower="eta_lower", eta_upper="eta_upper", normalize_input="normalize_input")

# V2 is D^2 at the noise level each set was published for
PRESETS: Dict[str, AiePreset] = {
    "two_tone_single": AiePreset(derivative_order=1, n_e=12, n_f=25, R_z=1.0, R_d=1e-5,
                                 R_theta=1e-1, V1=1e-6, V2=0.01, eta_lower=1e-6, eta_upper=1e2),
    "two_tone_double": AiePreset(derivative_order=2, n_e=12, n_f=20, R_z=1.0, R_d=1e-5,
                                 R_theta=10 ** -0.1, V1=1e-1, V2=1e-4, eta_lower=1e-6,
                                 eta_upper=1.0),
    "maneuver_single": AiePreset(derivative_order=1, n_e=25, n_f=50, R_z=1.0, R_d=1e-6,
                                 R_theta=10 ** -0.1, V1=1e-5, V2=0.0049, eta_lower=1e-6,
                                 eta_upper=1e-2),
    "maneuver_double": AiePreset(derivative_order=2, n_e=25, n_f=21, R_z=1.0, R_d=1e-5,
                                 R_theta=1e-8, V1=1e-3, V2=0.0049, eta_lower=1e-3,
                                 eta_upper=1.0),
}

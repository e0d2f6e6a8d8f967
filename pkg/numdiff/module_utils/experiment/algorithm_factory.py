# ./numdiff/module_utils/experiment/algorithm_factory.py

from __future__ import annotations

from typing import Any, Dict, Optional

from numdiff.module_utils.baselines.backward_difference import BackwardDifferenceDifferentiator
from numdiff.module_utils.baselines.high_gain_observer import HgoConfig, HighGainObserverDifferentiator
from numdiff.module_utils.baselines.savitzky_golay import SavitzkyGolayDifferentiator, SgConfig
from numdiff.module_utils.common.errors import InvalidArgumentError
from numdiff.module_utils.common.streaming import Differentiator
from numdiff.module_utils.estimation.estimator import (
    PRESETS,
    AdaptiveInputEstimator,
    AieDifferentiator,
    AiePreset,
)

EXAMPLES = r'''
Using:
from numdiff.module_utils.experiment.algorithm_factory import AlgorithmFactory

factory = AlgorithmFactory(derivative_order=1, sample_time_s=0.01)
hgo = factory.build({'name': 'HGO/1', 'kind': 'hgo', 'preset': 'hgo1'})
ase = factory.build({'name': 'AIE/ASE', 'kind': 'aie', 'preset': 'two_tone_single', 'mode': 'ASE'},
                    v2_true=0.01)
'''

KINDS = ("bd", "sg", "hgo", "aie")

# Parameter sets of the baseline comparison, keyed by derivative order
BASELINE_PRESETS: Dict[str, Dict[int, Dict[str, Any]]] = {
    "sg": {
        1: dict(half_window=2, poly_degree=3),
        2: dict(half_window=2, poly_degree=2),
    },
    "hgo1": {
        1: dict(order=2, alphas=[2.0, 1.0], epsilon=0.2),
        2: dict(order=3, alphas=[8.0, 24.0, 32.0], epsilon=1.0),
    },
    "hgo2": {
        1: dict(order=2, alphas=[2.0, 1.0], epsilon=0.7),
        2: dict(order=3, alphas=[8.0, 24.0, 32.0], epsilon=2.0),
    },
}


class AlgorithmFactory:
    """
    Builds streaming differentiators from algorithm records of an experiment descriptor.

    A record names its `kind` (bd, sg, hgo or aie), optionally a `preset`,
    and any explicit field overrides the preset value.
    """

    def __init__(self, derivative_order: int, sample_time_s: float):
        """
        Args:
            derivative_order: q of the experiment
            sample_time_s: T_s of the signals
        """
        if derivative_order not in (1, 2):
            raise InvalidArgumentError(f"derivative_order must be 1 or 2, got {derivative_order}")
        self.derivative_order = derivative_order
        self.sample_time_s = sample_time_s

    def resolve(self, record: Dict[str, Any]) -> Dict[str, Any]:
        """
        Merge the preset named by a record with its explicit fields

        Args:
            record: Algorithm record, None values count as unset

        Returns:
            dict: Effective parameters
        """
        kind = record.get("kind")
        if kind not in KINDS:
            raise InvalidArgumentError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}")
        explicit = {key: value for key, value in record.items() if value is not None}
        preset_name = explicit.pop("preset", None)
        if preset_name is None:
            return explicit

        if kind == "aie":
            if preset_name not in PRESETS:
                raise InvalidArgumentError(
                    f"unknown AIE preset {preset_name!r}, expected one of {', '.join(PRESETS)}")
            preset = PRESETS[preset_name]
            if preset.derivative_order != self.derivative_order:
                raise InvalidArgumentError(
                    f"preset {preset_name!r} differentiates q={preset.derivative_order}, "
                    f"experiment uses q={self.derivative_order}")
            base = preset.record_fields()
        else:
            if preset_name not in BASELINE_PRESETS or (kind == "sg") != (preset_name == "sg"):
                raise InvalidArgumentError(f"unknown {kind} preset {preset_name!r}")
            base = dict(BASELINE_PRESETS[preset_name][self.derivative_order])
        base.update(explicit)
        return base

    def _aie_estimator(self, params: Dict[str, Any], v2_true: Optional[float]) -> AdaptiveInputEstimator:
        mode = params.get("mode")
        v2 = params.get("v2")
        if v2 is None and mode in ("NSE", "SSE"):
            if v2_true is None:
                raise InvalidArgumentError(
                    f"AIE/{mode} needs v2, or a noise level to derive it from")
            v2 = params.get("v2_scale", 1.0) * v2_true
        adapt = {} if mode == "NSE" else {
            key: params[key] for key in ("grid_points", "grid_scale", "alpha") if params.get(key) is not None}
        preset = AiePreset.from_record(params, self.derivative_order)
        return preset.build(mode, self.sample_time_s, V2=v2, **adapt)

    def build(self, record: Dict[str, Any], v2_true: Optional[float] = None) -> Differentiator:
        """
        Differentiator for one algorithm record

        Args:
            record: Algorithm record
            v2_true: D^2 of the signal being differentiated, used when an AIE
                record leaves v2 unset

        Returns:
            Differentiator

        Raises:
            InvalidArgumentError: If the parameters violate an algorithm invariant
        """
        params = self.resolve(record)
        kind = params["kind"]
        q = self.derivative_order

        if kind == "bd":
            return BackwardDifferenceDifferentiator(q, self.sample_time_s)

        if kind == "sg":
            config = SgConfig(half_window=params.get("half_window", 0),
                              poly_degree=params.get("poly_degree", 0),
                              derivative_order=q, sample_time_s=self.sample_time_s)
            return SavitzkyGolayDifferentiator(config)

        if kind == "hgo":
            alphas = tuple(params.get("alphas") or ())
            config = HgoConfig(order=params.get("order", len(alphas)), alphas=alphas,
                               epsilon=params.get("epsilon", 0.0), sample_time_s=self.sample_time_s)
            return HighGainObserverDifferentiator(config, q)

        return AieDifferentiator(self._aie_estimator(params, v2_true), q)

    def r_theta_mismatch(self, record: Dict[str, Any]) -> Optional[str]:
        """
        Message when a record's declared R_theta size differs from 2 n_e + 1

        Returns:
            None when consistent or undeclared
        """
        params = self.resolve(record)
        declared = params.get("r_theta_size")
        if params.get("kind") != "aie" or declared is None or params.get("n_e") is None:
            return None
        expected = 2 * params["n_e"] + 1
        if declared == expected:
            return None
        return (f"{params.get('name', 'aie')}: r_theta_size={declared} differs from "
                f"2 n_e + 1 = {expected}; using {expected}")

# ./numdiff/module_utils/experiment/experiment_config.py

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import yaml
from ansible.module_utils.common.arg_spec import ArgumentSpecValidator

from numdiff.module_utils.common.errors import ConfigError, NumDiffError
from numdiff.module_utils.experiment.algorithm_factory import AlgorithmFactory, KINDS

SCENARIOS = ("two_tone", "single_tone", "csv_input", "maneuver")

MANEUVER_SPEC = dict(
    velocity_mps=dict(type='float', default=0.2),
    lateral_offset_m=dict(type='float', default=3.5),
    midpoint_s=dict(type='float', default=7.5),
    transition_s=dict(type='float', default=0.8),
    initial_offset_m=dict(type='float', default=0.0),
)

SIGNAL_SPEC = dict(
    amplitude_1=dict(type='float', default=1.0),
    freq_1=dict(type='float', default=20.0),
    amplitude_2=dict(type='float', default=1.0),
    freq_2=dict(type='float', default=30.0),
    input_path=dict(type='path'),
    maneuver=dict(type='dict', default={}, options=MANEUVER_SPEC),
)

ALGORITHM_SPEC = dict(
    name=dict(type='str', required=True),
    kind=dict(type='str', required=True, choices=list(KINDS)),
    preset=dict(type='str'),
    # sg
    half_window=dict(type='int'),
    poly_degree=dict(type='int'),
    # hgo
    order=dict(type='int'),
    alphas=dict(type='list', elements='float'),
    epsilon=dict(type='float'),
    # aie
    mode=dict(type='str', choices=['NSE', 'SSE', 'ASE']),
    n_e=dict(type='int'),
    n_f=dict(type='int'),
    R_z=dict(type='float'),
    R_d=dict(type='float'),
    R_theta=dict(type='float'),
    r_theta_size=dict(type='int'),
    v1=dict(type='float'),
    v2=dict(type='float'),
    v2_scale=dict(type='float'),
    eta_lower=dict(type='float'),
    eta_upper=dict(type='float'),
    grid_points=dict(type='int'),
    grid_scale=dict(type='str', choices=['linear', 'logarithmic']),
    alpha=dict(type='float'),
    normalize_input=dict(type='bool'),
)

EXPERIMENT_ARGUMENT_SPEC = dict(
    scenario=dict(type='str', required=True, choices=list(SCENARIOS)),
    derivative_order=dict(type='int', required=True, choices=[1, 2]),
    sample_time_s=dict(type='float', default=0.01),
    k_f=dict(type='int', default=2000),
    signal=dict(type='dict', default={}, options=SIGNAL_SPEC),
    snr_db_list=dict(type='list', elements='float', default=[]),
    noise_amplitude=dict(type='float'),
    seeds=dict(type='list', elements='int', default=[0]),
    algorithms=dict(
        type='list', elements='dict', default=[], options=ALGORITHM_SPEC,
        required_if=[
            ('kind', 'aie', ('mode',)),
        ],
    ),
    eta_sweep=dict(type='dict', options=dict(
        eta_lower=dict(type='float', required=True),
        eta_upper=dict(type='float', required=True),
        points=dict(type='int', default=25),
        scale=dict(type='str', choices=['linear', 'logarithmic'], default='logarithmic'),
    )),
    burn_in=dict(type='int', default=0),
    emit_traces=dict(type='bool', default=False),
    output_dir=dict(type='path', required=True),
)


def _number(value: Any) -> Optional[float]:
    """Numeric value of a parameter, None when it failed type conversion."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    return float(value)


def _as_list(value: Any) -> List[Any]:
    return list(value) if isinstance(value, (list, tuple)) else []


@dataclass
class ExperimentConfig:
    """
    Validated experiment descriptor

    Attributes mirror EXPERIMENT_ARGUMENT_SPEC; `source` is the descriptor
    path, relative paths inside it resolve against its directory.
    """
    scenario: str
    derivative_order: int
    sample_time_s: float
    k_f: int
    signal: Dict[str, Any]
    snr_db_list: List[float]
    noise_amplitude: Optional[float]
    seeds: List[int]
    algorithms: List[Dict[str, Any]]
    eta_sweep: Optional[Dict[str, Any]]
    burn_in: int
    emit_traces: bool
    output_dir: str
    source: Optional[str] = None
    warnings: List[str] = field(default_factory=list)

    def factory(self) -> AlgorithmFactory:
        return AlgorithmFactory(self.derivative_order, self.sample_time_s)


class ExperimentConfigUtils:
    """
    Loads experiment descriptors and collects every violation before any computation runs.
    """

    def __init__(self, argument_spec: Optional[Dict[str, Any]] = None):
        self.argument_spec = argument_spec or EXPERIMENT_ARGUMENT_SPEC

    def read_descriptor(self, path: str) -> Tuple[bool, Any]:
        """
        Parse a YAML descriptor

        Args:
            path: Descriptor file

        Returns:
            tuple: (success, mapping or error message)
        """
        try:
            with open(path) as handle:
                data = yaml.safe_load(handle)
        except OSError as e:
            return False, f"cannot read {path}: {e.strerror}"
        except yaml.YAMLError as e:
            return False, f"cannot parse {path}: {e}"
        if not isinstance(data, dict):
            return False, f"{path}: top level must be a mapping"
        return True, data

    def _semantic_errors(self, config: ExperimentConfig) -> List[str]:
        errors = []
        sample_time_s = _number(config.sample_time_s)
        if sample_time_s is not None and (sample_time_s <= 0 or not math.isfinite(sample_time_s)):
            errors.append(f"sample_time_s: must be positive, got {config.sample_time_s}")
        if _number(config.k_f) is not None and config.k_f < 1:
            errors.append(f"k_f: must be >= 1, got {config.k_f}")
        if _number(config.burn_in) is not None and config.burn_in < 0:
            errors.append(f"burn_in: must be >= 0, got {config.burn_in}")
        if any(_number(seed) is not None and seed < 0 for seed in config.seeds):
            errors.append("seeds: must be unsigned integers")
        if not config.seeds:
            errors.append("seeds: at least one seed is required")
        if _number(config.noise_amplitude) is not None and config.noise_amplitude < 0:
            errors.append(f"noise_amplitude: must be >= 0, got {config.noise_amplitude}")
        if config.scenario == "csv_input":
            input_path = config.signal.get("input_path")
            if not input_path:
                errors.append("signal.input_path: required for scenario csv_input")
            elif not os.path.isfile(input_path):
                errors.append(f"signal.input_path: no such file {input_path}")
        if isinstance(config.eta_sweep, dict):
            sweep = config.eta_sweep
            lower, upper = _number(sweep.get("eta_lower")), _number(sweep.get("eta_upper"))
            if lower is not None and upper is not None and not 0 <= lower <= upper:
                errors.append("eta_sweep: need 0 <= eta_lower <= eta_upper")
            if sweep.get("scale") == "logarithmic" and lower is not None and lower <= 0:
                errors.append("eta_sweep.eta_lower: a logarithmic sweep needs eta_lower > 0")
            if _number(sweep.get("points")) is not None and sweep["points"] < 1:
                errors.append(f"eta_sweep.points: must be >= 1, got {sweep['points']}")

        records = [record for record in config.algorithms if isinstance(record, dict)]
        names = [record.get("name") for record in records if record.get("name") is not None]
        for name in sorted({n for n in names if names.count(n) > 1}):
            errors.append(f"algorithms: duplicate name {name!r}")

        if config.derivative_order not in (1, 2) or sample_time_s is None or sample_time_s <= 0:
            return errors
        factory = config.factory()
        placeholder_v2 = 1.0
        for index, record in enumerate(config.algorithms):
            if not isinstance(record, dict):
                continue
            try:
                factory.build(record, v2_true=placeholder_v2)
                mismatch = factory.r_theta_mismatch(record)
                if mismatch:
                    config.warnings.append(f"algorithms[{index}].r_theta_size: {mismatch}")
            except (NumDiffError, ValueError, TypeError, KeyError) as e:
                errors.append(f"algorithms[{index}] ({record.get('name')}): {e}")
        return errors

    def validate(self, data: Dict[str, Any], source: Optional[str] = None,
                 overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        """
        Validate a descriptor mapping

        Args:
            data: Parsed descriptor
            source: Descriptor path, used to resolve relative paths
            overrides: seed and output_dir replacements from the command line

        Returns:
            ExperimentConfig

        Raises:
            ConfigError: With every structural and semantic violation
        """
        data = dict(data)
        overrides = overrides or {}
        if overrides.get("seed") is not None:
            data["seeds"] = [overrides["seed"]]
        if overrides.get("output_dir"):
            data["output_dir"] = overrides["output_dir"]

        result = ArgumentSpecValidator(self.argument_spec).validate(data)
        structural = list(result.error_messages)
        params = result.validated_parameters

        base_dir = os.path.dirname(os.path.abspath(source)) if source else os.getcwd()
        signal = params.get("signal")
        signal = dict(signal) if isinstance(signal, dict) else {}
        if isinstance(signal.get("input_path"), str) and signal["input_path"]:
            signal["input_path"] = os.path.join(base_dir, signal["input_path"])
        output_dir = params.get("output_dir")
        if isinstance(output_dir, str) and not overrides.get("output_dir"):
            output_dir = os.path.join(base_dir, output_dir)

        config = ExperimentConfig(
            scenario=params.get("scenario"),
            derivative_order=params.get("derivative_order"),
            sample_time_s=params.get("sample_time_s"),
            k_f=params.get("k_f"),
            signal=signal,
            snr_db_list=_as_list(params.get("snr_db_list")),
            noise_amplitude=params.get("noise_amplitude"),
            seeds=_as_list(params.get("seeds")),
            algorithms=[dict(record) if isinstance(record, dict) else record
                        for record in _as_list(params.get("algorithms"))],
            eta_sweep=params.get("eta_sweep"),
            burn_in=params.get("burn_in"),
            emit_traces=params.get("emit_traces"),
            output_dir=output_dir,
            source=source,
        )
        errors = structural + self._semantic_errors(config)
        if errors:
            raise ConfigError(errors)
        return config

    def load(self, path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        """
        Read and validate a descriptor file

        Raises:
            ConfigError: If the file is unreadable or invalid
        """
        success, data = self.read_descriptor(path)
        if not success:
            raise ConfigError([data])
        return self.validate(data, source=path, overrides=overrides)

# ./numdiff/modules/signal/differentiate.py

from __future__ import annotations

DOCUMENTATION = r'''
---
module: differentiate
short_description: Differentiate a CSV signal sample by sample
description:
  - Streams the samples of a t,y CSV file through one differentiator
  - Each estimate is written on the row of the step at which it becomes available (k + delta)
  - Rows before the first estimate have an empty d_hat
  - AIE algorithms also write their residual z_k on row k
options:
  input:
    description:
      - Signal file with header t,y and optional truth columns d1, d2
    required: true
    type: path
  algorithm:
    description:
      - Differentiator to run
      - sg, hgo1 and hgo2 use the parameters of the baseline comparison
      - nse, sse and ase use aie_preset
    required: true
    type: str
    choices: [ 'bd', 'sg', 'hgo1', 'hgo2', 'nse', 'sse', 'ase' ]
  derivative_order:
    description:
      - Derivative to estimate
    type: int
    choices: [ 1, 2 ]
    default: 1
  aie_preset:
    description:
      - Parameter set of the AIE algorithms
      - Defaults to two_tone_single for order 1 and two_tone_double for order 2
    type: str
    choices: [ 'two_tone_single', 'two_tone_double', 'maneuver_single', 'maneuver_double' ]
  v2:
    description:
      - Sensor noise covariance of AIE/NSE and AIE/SSE, the preset value by default
    type: float
  output:
    description:
      - Output CSV, defaults to <input>.<algorithm>.d<order>.csv next to the input
    type: path
'''

EXAMPLES = r'''
# Backward difference of a recorded trajectory
numdiff differentiate --input track.csv --algorithm bd

# Second derivative with adaptive input estimation
numdiff differentiate --input track.csv --algorithm ase --derivative-order 2 --aie-preset maneuver_double
'''

RETURN = r'''
output:
  description: Path of the CSV written (columns k,t,y,d_hat and z for AIE)
  type: str
  returned: success
rows:
  description: Number of rows written, equal to the number of input samples
  type: int
  returned: success
delay_steps:
  description: Delay delta of the differentiator
  type: int
  returned: success
'''

import csv
import os
from typing import Any, Dict, List, Optional

from ansible.utils.display import Display

from numdiff.module_utils.common.command import CommandModule, RC_CONFIG
from numdiff.module_utils.common.errors import NumDiffError, SignalFormatError
from numdiff.module_utils.common.streaming import Differentiator
from numdiff.module_utils.estimation.estimator import PRESETS
from numdiff.module_utils.experiment.algorithm_factory import AlgorithmFactory
from numdiff.module_utils.signals.csv_utils import format_float, read_csv
from numdiff.module_utils.signals.signal_utils import SampledSignal

display = Display()

argument_spec = dict(
    input=dict(type='path', required=True),
    algorithm=dict(type='str', required=True,
                   choices=['bd', 'sg', 'hgo1', 'hgo2', 'nse', 'sse', 'ase']),
    derivative_order=dict(type='int', choices=[1, 2], default=1),
    aie_preset=dict(type='str', choices=list(PRESETS)),
    v2=dict(type='float'),
    output=dict(type='path'),
)

DEFAULT_AIE_PRESETS = {1: "two_tone_single", 2: "two_tone_double"}


def algorithm_record(name: str, derivative_order: int, aie_preset: Optional[str] = None,
                     v2: Optional[float] = None) -> Dict[str, Any]:
    """
    Algorithm record for a command-line algorithm name

    Returns:
        dict: Record accepted by AlgorithmFactory
    """
    if name == "bd":
        return {"name": "BD", "kind": "bd"}
    if name == "sg":
        return {"name": "SG", "kind": "sg", "preset": "sg"}
    if name in ("hgo1", "hgo2"):
        return {"name": name.upper(), "kind": "hgo", "preset": name}
    preset = aie_preset or DEFAULT_AIE_PRESETS[derivative_order]
    mode = name.upper()
    if v2 is None and mode in ("NSE", "SSE"):
        v2 = PRESETS[preset].V2
    return {"name": f"AIE/{mode}", "kind": "aie", "preset": preset, "mode": mode, "v2": v2}


def stream(differentiator: Differentiator, signal: SampledSignal) -> Dict[str, List[Optional[float]]]:
    """
    Feed every sample and place each estimate on its availability row

    Returns:
        dict: d_hat and z columns, None where empty
    """
    size = len(signal)
    d_hat: List[Optional[float]] = [None] * size
    residual: List[Optional[float]] = [None] * size
    differentiator.reset()
    for k, y_k in enumerate(signal.values):
        emission = differentiator.update(y_k)
        if emission is None:
            continue
        row = emission.step + differentiator.delay_steps
        if row < size:
            d_hat[row] = emission.value
        if emission.residual is not None:
            residual[k] = emission.residual
    return {"d_hat": d_hat, "z": residual}


def write_estimates(path: str, signal: SampledSignal, columns: Dict[str, List[Optional[float]]],
                    with_residual: bool) -> None:
    header = ["k", "t", "y", "d_hat"] + (["z"] if with_residual else [])
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for k in range(len(signal)):
            row = [k, format_float(k * signal.sample_time_s), format_float(signal.values[k])]
            names = ["d_hat", "z"] if with_residual else ["d_hat"]
            row += ["" if columns[name][k] is None else format_float(columns[name][k]) for name in names]
            writer.writerow(row)


def run_module(params: Dict[str, Any]) -> None:
    module = CommandModule(argument_spec=argument_spec, params=params)
    input_path = module.params['input']
    name = module.params['algorithm']
    q = module.params['derivative_order']

    try:
        signal = read_csv(input_path)
    except OSError as e:
        module.fail_json(msg=f"Failed to read {input_path}: {e.strerror}")
    except SignalFormatError as e:
        module.fail_json(msg=f"{input_path}: {e}")

    if len(signal) == 0:
        module.fail_json(msg=f"{input_path}: no samples")

    record = algorithm_record(name, q, module.params['aie_preset'], module.params['v2'])
    try:
        differentiator = AlgorithmFactory(q, signal.sample_time_s).build(record)
    except NumDiffError as e:
        module.fail_json(msg=f"Invalid algorithm {name}: {e}")

    display.vvv(f"Differentiating {len(signal)} samples of {input_path} with {record['name']}, "
                f"T_s={signal.sample_time_s}")
    try:
        columns = stream(differentiator, signal)
    except NumDiffError as e:
        module.fail_json(msg=f"{record['name']} failed: {e}", rc=RC_CONFIG)

    output = module.params['output']
    if not output:
        stem, _ = os.path.splitext(input_path)
        output = f"{stem}.{name}.d{q}.csv"
    try:
        write_estimates(output, signal, columns, with_residual=record["kind"] == "aie")
    except OSError as e:
        module.fail_json(msg=f"Failed to write {output}: {e.strerror}")

    module.exit_json(changed=True, msg=f"Wrote {len(signal)} rows to {output}", output=output,
                     rows=len(signal), delay_steps=differentiator.delay_steps)

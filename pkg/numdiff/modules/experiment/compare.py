# ./numdiff/modules/experiment/compare.py

from __future__ import annotations

DOCUMENTATION = r'''
---
module: compare
short_description: Compare differentiators over SNRs and noise seeds
description:
  - Runs every algorithm of an experiment descriptor on every (SNR, seed) noisy signal
  - Scores each run with the delay-aware relative RMSE against the exact derivative
  - Writes one rho CSV per run, summary.csv with the final rho of every run plus
    the delay floors, and aggregate.csv with mean and median over seeds
  - A failing run is reported in failed_cells and the others still complete
options:
  config:
    description:
      - Experiment descriptor (YAML)
    required: true
    type: path
  jobs:
    description:
      - Number of runs computed in parallel
    type: int
    default: 1
  seed:
    description:
      - Replaces the seeds of the descriptor with this single seed
    type: int
  output:
    description:
      - Replaces output_dir of the descriptor
    type: path
'''

EXAMPLES = r'''
# Baseline comparison of BD, SG and the two high-gain observers
numdiff compare --config experiments/baseline_single/experiment.yml --jobs 4

# Adaptive estimators on the two-tone signal, one seed
numdiff -vvv compare --config experiments/two_tone_single/experiment.yml --seed 0
'''

RETURN = r'''
cells:
  description: Number of (algorithm, SNR, seed) runs
  type: int
  returned: always
failed_cells:
  description: One record (algorithm, snr_db, seed, msg) per failed run
  type: list
  returned: always
files:
  description: CSV files written, summaries first
  type: list
  returned: always
'''

from typing import Any, Dict

from ansible.utils.display import Display

from numdiff.module_utils.common.command import CommandModule, RC_CONFIG, RC_PARTIAL
from numdiff.module_utils.common.errors import ConfigError
from numdiff.module_utils.experiment.experiment_config import ExperimentConfigUtils
from numdiff.module_utils.experiment.runner_utils import CellResult, CellTask, ExperimentRunner

display = Display()

argument_spec = dict(
    config=dict(type='path', required=True),
    jobs=dict(type='int', default=1),
    seed=dict(type='int'),
    output=dict(type='path'),
)


def log_cell(task: CellTask, result: CellResult) -> None:
    label = f"{task.record['name']} snr={task.snr_db:g} seed={task.seed}"
    if result.error is not None:
        display.warning(f"{label} failed: {result.error['msg']}")
    else:
        display.vvv(f"{label} final_rho={result.report.final_rho:.6g}")


def load_runner(module: CommandModule) -> ExperimentRunner:
    """Validated experiment and its runner, or a failed result."""
    if module.params['jobs'] < 1:
        module.fail_json(msg=f"jobs must be >= 1, got {module.params['jobs']}")
    try:
        config = ExperimentConfigUtils().load(
            module.params['config'],
            overrides=dict(seed=module.params['seed'], output_dir=module.params['output']))
    except ConfigError as e:
        module.fail_json(msg=f"Invalid experiment: {e}", errors=e.errors)
    for warning in config.warnings:
        display.warning(warning)
    return ExperimentRunner(config, jobs=module.params['jobs'], progress=log_cell)


def finish(module: CommandModule, outcome: Dict[str, Any], what: str) -> None:
    failed = outcome["failed_cells"]
    msg = f"{what}: {outcome['cells'] - len(failed)} of {outcome['cells']} runs succeeded"
    if failed:
        module.fail_json(msg=msg, rc=RC_PARTIAL, changed=True, **outcome)
    module.exit_json(changed=True, msg=msg, **outcome)


def run_module(params: Dict[str, Any]) -> None:
    module = CommandModule(argument_spec=argument_spec, params=params)
    runner = load_runner(module)
    try:
        outcome = runner.compare()
    except OSError as e:
        module.fail_json(msg=f"Failed to write results: {e}", rc=RC_CONFIG)
    finish(module, outcome, "compare")

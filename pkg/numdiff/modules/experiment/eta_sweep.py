# ./numdiff/modules/experiment/eta_sweep.py

from __future__ import annotations

DOCUMENTATION = r'''
---
module: eta_sweep
short_description: Accuracy of AIE/NSE versus the process covariance V1 = eta I
description:
  - Runs the first AIE algorithm with mode NSE of the descriptor once per eta of eta_sweep,
    with V1 = eta I
  - Runs every other algorithm once as a constant reference line (typically AIE/SSE with
    V2 = V2,true and 2 V2,true, and AIE/ASE)
  - Writes eta_sweep.csv with the final rho of every run and eta_sweep_aggregate.csv with
    mean and median over seeds
options:
  config:
    description:
      - Experiment descriptor (YAML) holding an eta_sweep section
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
numdiff eta-sweep --config experiments/two_tone_single/experiment.yml --jobs 8
'''

RETURN = r'''
cells:
  description: Number of runs, sweep points and reference lines
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

from numdiff.module_utils.common.command import CommandModule, RC_CONFIG
from numdiff.module_utils.common.errors import ConfigError
from numdiff.modules.experiment.compare import finish, load_runner

argument_spec = dict(
    config=dict(type='path', required=True),
    jobs=dict(type='int', default=1),
    seed=dict(type='int'),
    output=dict(type='path'),
)


def run_module(params: Dict[str, Any]) -> None:
    module = CommandModule(argument_spec=argument_spec, params=params)
    runner = load_runner(module)
    try:
        outcome = runner.eta_sweep()
    except ConfigError as e:
        module.fail_json(msg=f"Invalid experiment: {e}", errors=e.errors)
    except OSError as e:
        module.fail_json(msg=f"Failed to write results: {e}", rc=RC_CONFIG)
    finish(module, outcome, "eta-sweep")

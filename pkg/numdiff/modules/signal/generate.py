# ./numdiff/modules/signal/generate.py

from __future__ import annotations

DOCUMENTATION = r'''
---
module: generate
short_description: Write the signals of an experiment as CSV files
description:
  - Builds the clean signal of an experiment descriptor and writes it with its truth derivatives
  - Writes one noisy copy per (SNR, seed) pair of the descriptor
  - Noise is white Gaussian scaled to the requested SNR, or to noise_amplitude when set
options:
  config:
    description:
      - Experiment descriptor (YAML)
    required: true
    type: path
  seed:
    description:
      - Replaces the seeds of the descriptor with this single seed
    type: int
  output:
    description:
      - Replaces output_dir of the descriptor
    type: path
requirements:
  - "python >= 3.10"
  - "numpy"
'''

EXAMPLES = r'''
# Two-tone signal at the SNRs and seeds of the descriptor
numdiff generate --config experiments/two_tone_single/experiment.yml

# Single seed into a scratch directory
numdiff generate --config experiments/maneuver_single/experiment.yml --seed 3 --output /tmp/maneuver
'''

RETURN = r'''
files:
  description: CSV files written, clean signal first
  type: list
  returned: success
clean:
  description: Path of the clean signal
  type: str
  returned: success
'''

import os
from typing import Any, Dict, List

from ansible.utils.display import Display

from numdiff.module_utils.common.command import CommandModule, RC_CONFIG
from numdiff.module_utils.common.errors import ConfigError, NumDiffError
from numdiff.module_utils.experiment.experiment_config import ExperimentConfig, ExperimentConfigUtils
from numdiff.module_utils.experiment.runner_utils import build_clean_signal, snr_label
from numdiff.module_utils.signals.csv_utils import write_csv
from numdiff.module_utils.signals.signal_utils import NoiseSpec, add_noise

display = Display()

argument_spec = dict(
    config=dict(type='path', required=True),
    seed=dict(type='int'),
    output=dict(type='path'),
)


def generate_signals(config: ExperimentConfig) -> List[str]:
    """
    Write clean.csv and one noisy__snr<S>__seed<N>.csv per pair

    Args:
        config: Validated experiment

    Returns:
        list: Paths written
    """
    os.makedirs(config.output_dir, exist_ok=True)
    clean = build_clean_signal(config)
    clean_path = os.path.join(config.output_dir, "clean.csv")
    write_csv(clean, clean_path)
    files = [clean_path]

    for snr in config.snr_db_list:
        for seed in config.seeds:
            noisy = add_noise(clean, NoiseSpec(snr_db=snr, seed=seed, amplitude=config.noise_amplitude))
            path = os.path.join(config.output_dir, f"noisy__snr{snr_label(snr)}__seed{seed}.csv")
            write_csv(noisy, path)
            display.vvv(f"Wrote {path}")
            files.append(path)
    return files


def run_module(params: Dict[str, Any]) -> None:
    module = CommandModule(argument_spec=argument_spec, params=params)

    try:
        config = ExperimentConfigUtils().load(
            module.params['config'],
            overrides=dict(seed=module.params['seed'], output_dir=module.params['output']))
    except ConfigError as e:
        module.fail_json(msg=f"Invalid experiment: {e}", errors=e.errors)

    for warning in config.warnings:
        display.warning(warning)

    try:
        files = generate_signals(config)
    except OSError as e:
        module.fail_json(msg=f"Failed to write signals to {config.output_dir}: {e.strerror}",
                         rc=RC_CONFIG)
    except NumDiffError as e:
        module.fail_json(msg=str(e), rc=RC_CONFIG)

    noisy_count = len(files) - 1
    module.exit_json(changed=True, msg=f"Wrote clean signal and {noisy_count} noisy signals",
                     clean=files[0], files=files)

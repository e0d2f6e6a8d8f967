# ./tests/unit/modules/experiment/test_compare.py

import os

import pytest

from conftest import base_descriptor
from numdiff.module_utils.common.command import RC_CONFIG, RC_OK, RC_PARTIAL, CommandExit
from numdiff.modules.experiment.compare import run_module


def run(params):
    with pytest.raises(CommandExit) as excinfo:
        run_module(params)
    return excinfo.value


def test_all_cells_succeed(write_descriptor, tmp_path):
    exit_ = run({"config": write_descriptor(base_descriptor(seeds=[0, 1]))})
    assert exit_.rc == RC_OK
    assert exit_.result["msg"] == "compare: 4 of 4 runs succeeded"
    assert exit_.result["failed_cells"] == []
    assert exit_.result["files"][0] == os.path.join(str(tmp_path), "results", "summary.csv")
    assert os.path.isfile(exit_.result["files"][1])


def test_failed_cells_give_partial_rc(write_descriptor):
    path = write_descriptor(base_descriptor(signal={"amplitude_1": 0.0, "amplitude_2": 0.0}))
    exit_ = run({"config": path})
    assert exit_.rc == RC_PARTIAL
    assert exit_.result["failed"] is True
    assert exit_.result["changed"] is True
    assert len(exit_.result["failed_cells"]) == 2
    assert os.path.isfile(exit_.result["files"][0])


def test_invalid_experiment(write_descriptor):
    exit_ = run({"config": write_descriptor(base_descriptor(scenario="square_wave"))})
    assert exit_.rc == RC_CONFIG
    assert exit_.result["msg"].startswith("Invalid experiment")


def test_invalid_jobs(write_descriptor):
    exit_ = run({"config": write_descriptor(base_descriptor()), "jobs": 0})
    assert exit_.rc == RC_CONFIG
    assert "jobs" in exit_.result["msg"]


def test_missing_descriptor(tmp_path):
    exit_ = run({"config": str(tmp_path / "absent.yml")})
    assert exit_.rc == RC_CONFIG
    assert "cannot read" in exit_.result["msg"]


def test_seed_and_output_overrides(write_descriptor, tmp_path):
    exit_ = run({"config": write_descriptor(base_descriptor(seeds=[0, 1, 2])), "seed": 9,
                 "output": str(tmp_path / "one_seed")})
    assert exit_.result["msg"] == "compare: 2 of 2 runs succeeded"
    assert any(path.endswith("rho__bd__snr20__seed9.csv") for path in exit_.result["files"])

# ./tests/conftest.py

import os

import pytest
import yaml

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def base_descriptor(**overrides):
    """Small two-tone experiment: BD and SG on 200 clean or noisy samples."""
    data = {
        "scenario": "two_tone",
        "derivative_order": 1,
        "sample_time_s": 0.01,
        "k_f": 200,
        "snr_db_list": [20.0],
        "seeds": [0],
        "algorithms": [
            {"name": "BD", "kind": "bd"},
            {"name": "SG", "kind": "sg", "preset": "sg"},
        ],
        "output_dir": "results",
    }
    data.update(overrides)
    return data


@pytest.fixture
def write_descriptor(tmp_path):
    """Write a descriptor mapping as experiment.yml under tmp_path and return its path."""

    def _write(data, name="experiment.yml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, sort_keys=False))
        return str(path)

    return _write


@pytest.fixture
def shipped_experiments():
    root = os.path.join(REPO_ROOT, "experiments")
    return sorted(os.path.join(root, name, "experiment.yml") for name in os.listdir(root))

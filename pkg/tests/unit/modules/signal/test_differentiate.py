# ./tests/unit/modules/signal/test_differentiate.py

import csv

import pytest

from numdiff.module_utils.common.command import RC_CONFIG, CommandExit
from numdiff.module_utils.estimation.estimator import PRESETS
from numdiff.modules.signal.differentiate import algorithm_record, run_module


def write_ramp(tmp_path, samples=30, name="ramp.csv"):
    path = tmp_path / name
    rows = "".join(f"{k * 0.1!r},{2.0 * k * 0.1!r},2.0\n" for k in range(samples))
    path.write_text("t,y,d1\n" + rows)
    return str(path)


def run(params):
    with pytest.raises(CommandExit) as excinfo:
        run_module(params)
    return excinfo.value


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def test_backward_difference_of_a_ramp(tmp_path):
    source = write_ramp(tmp_path)
    result = run({"input": source, "algorithm": "bd"}).result
    assert result["output"] == str(tmp_path / "ramp.bd.d1.csv")
    assert result["rows"] == 30
    assert result["delay_steps"] == 1
    rows = read_rows(result["output"])
    assert list(rows[0]) == ["k", "t", "y", "d_hat"]
    assert len(rows) == 30
    assert rows[0]["d_hat"] == rows[1]["d_hat"] == ""
    for row in rows[2:]:
        assert float(row["d_hat"]) == pytest.approx(2.0, rel=1e-9)


def test_savitzky_golay_rows_start_after_its_delay(tmp_path):
    result = run({"input": write_ramp(tmp_path), "algorithm": "sg", "output": str(tmp_path / "sg.csv")}).result
    assert result["delay_steps"] == 3
    rows = read_rows(str(tmp_path / "sg.csv"))
    assert [row["d_hat"] for row in rows[:5]] == [""] * 5
    assert float(rows[5]["d_hat"]) == pytest.approx(2.0, rel=1e-9)


def test_estimator_writes_residual(tmp_path):
    result = run({"input": write_ramp(tmp_path), "algorithm": "ase"}).result
    rows = read_rows(result["output"])
    assert list(rows[0]) == ["k", "t", "y", "d_hat", "z"]
    assert len(rows) == 30
    assert rows[0]["d_hat"] == ""
    assert rows[0]["z"] != ""
    assert rows[1]["d_hat"] != ""


def test_second_derivative(tmp_path):
    result = run({"input": write_ramp(tmp_path), "algorithm": "bd", "derivative_order": 2}).result
    rows = read_rows(result["output"])
    assert result["output"].endswith("ramp.bd.d2.csv")
    assert rows[2]["d_hat"] == ""
    assert float(rows[3]["d_hat"]) == pytest.approx(0.0, abs=1e-9)


def test_algorithm_records():
    assert algorithm_record("hgo2", 1) == {"name": "HGO2", "kind": "hgo", "preset": "hgo2"}
    record = algorithm_record("sse", 2)
    assert record["preset"] == "two_tone_double"
    assert record["v2"] == PRESETS["two_tone_double"].V2
    assert algorithm_record("ase", 1, aie_preset="maneuver_single")["v2"] is None
    assert algorithm_record("nse", 1, v2=0.5)["v2"] == 0.5


def test_unknown_algorithm(tmp_path):
    exit_ = run({"input": write_ramp(tmp_path), "algorithm": "spline"})
    assert exit_.rc == RC_CONFIG
    assert "algorithm" in exit_.result["msg"]


def test_missing_input(tmp_path):
    exit_ = run({"input": str(tmp_path / "absent.csv"), "algorithm": "bd"})
    assert exit_.result["failed"] is True
    assert "Failed to read" in exit_.result["msg"]


def test_malformed_input(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,y\n0,0\n0.1,abc\n")
    exit_ = run({"input": str(path), "algorithm": "bd"})
    assert "line 3" in exit_.result["msg"]


def test_empty_input(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("t,y\n")
    assert "no samples" in run({"input": str(path), "algorithm": "bd"}).result["msg"]


def test_preset_of_other_order(tmp_path):
    exit_ = run({"input": write_ramp(tmp_path), "algorithm": "ase", "aie_preset": "two_tone_double"})
    assert exit_.rc == RC_CONFIG
    assert "Invalid algorithm ase" in exit_.result["msg"]

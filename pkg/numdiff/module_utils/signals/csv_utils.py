# ./numdiff/module_utils/signals/csv_utils.py

from __future__ import annotations

import csv
import os
from typing import Dict, List, Union

import numpy as np

from numdiff.module_utils.common.errors import SignalFormatError, SignalParseError
from numdiff.module_utils.signals.signal_utils import SampledSignal

PathLike = Union[str, os.PathLike]

TRUTH_COLUMNS = {"d1": 1, "d2": 2}


def format_float(value: float) -> str:
    """Shortest representation that parses back to the same double."""
    return repr(float(value))


def _parse_header(header: List[str]) -> List[str]:
    columns = [name.strip() for name in header]
    if columns[:2] != ["t", "y"]:
        raise SignalFormatError(
            f"line 1: header must start with 't,y', got {','.join(columns)!r}")
    extra = columns[2:]
    unknown = [name for name in extra if name not in TRUTH_COLUMNS]
    if unknown or len(set(extra)) != len(extra):
        raise SignalFormatError(
            f"line 1: unsupported truth columns {','.join(extra)!r} (expected d1 and/or d2)")
    return columns


def read_csv(path: PathLike, default_sample_time_s: float = 1.0) -> SampledSignal:
    """
    Read a `t,y[,d1,d2]` trajectory

    The sample time is inferred from the first two `t` values; files with fewer
    than two rows use `default_sample_time_s`.

    Args:
        path: CSV file to read
        default_sample_time_s: Fallback sample time

    Returns:
        SampledSignal with the truth columns present in the file

    Raises:
        SignalParseError: If a cell is not a number, naming its line
        SignalFormatError: If the header is unknown or a row has the wrong column count
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SignalFormatError("line 1: missing header row")
        columns = _parse_header(header)

        rows: List[List[float]] = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(columns):
                raise SignalFormatError(
                    f"line {reader.line_num}: expected {len(columns)} columns, got {len(row)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as e:
                raise SignalParseError(reader.line_num, str(e))

    data = np.array(rows, dtype=float).reshape(-1, len(columns))
    sample_time_s = default_sample_time_s
    if data.shape[0] >= 2:
        sample_time_s = float(data[1, 0] - data[0, 0])
        if not sample_time_s > 0:
            raise SignalFormatError(
                f"line 3: time column must be strictly increasing, got step {sample_time_s}")

    truths: Dict[int, np.ndarray] = {
        TRUTH_COLUMNS[name]: data[:, index]
        for index, name in enumerate(columns) if name in TRUTH_COLUMNS
    }
    return SampledSignal(sample_time_s=sample_time_s, values=data[:, 1],
                         truth_derivatives=truths)


def write_csv(signal: SampledSignal, path: PathLike) -> None:
    """
    Write a signal as `t,y[,d1,d2]`, one row per step

    Args:
        signal: Signal to serialise
        path: Destination file, overwritten if present
    """
    orders = sorted(signal.truth_derivatives)
    header = ["t", "y"] + [f"d{q}" for q in orders]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for k in range(len(signal)):
            row = [format_float(k * signal.sample_time_s), format_float(signal.values[k])]
            row.extend(format_float(signal.truth_derivatives[q][k]) for q in orders)
            writer.writerow(row)

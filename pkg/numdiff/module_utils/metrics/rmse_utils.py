# ./numdiff/module_utils/metrics/rmse_utils.py

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from numdiff.module_utils.common.errors import InvalidArgumentError, UndefinedMetricError
from numdiff.module_utils.signals.csv_utils import format_float

PathLike = Union[str, os.PathLike]


def relative_rmse(truth: Sequence[float], estimates: Sequence[float], delay: int,
                  burn_in: int = 0) -> np.ndarray:
    """
    Cumulative relative RMSE of delayed estimates

    rho_k = sqrt(sum_i (y_i - y_hat_{i-delay})^2 / sum_i y_{i-delay}^2) with i
    running from delay + burn_in to k. Steps whose delayed estimate is missing
    (NaN) are left out of both sums.

    Args:
        truth: y^{(q)}_0 ... y^{(q)}_{N-1}
        estimates: y_hat^{(q)} indexed by the step they estimate
        delay: delta >= 0
        burn_in: Extra leading steps left out of the sums, 0 reproduces the plain metric

    Returns:
        Array of length N, NaN before delay + burn_in and wherever the
        denominator is still zero
    """
    truth = np.asarray(truth, dtype=float)
    estimates = np.asarray(estimates, dtype=float)
    if truth.shape != estimates.shape or truth.ndim != 1:
        raise InvalidArgumentError(
            f"truth and estimates must be 1-D of equal length, got {truth.shape} and {estimates.shape}")
    if delay < 0 or burn_in < 0:
        raise InvalidArgumentError(f"delay and burn_in must be >= 0, got {delay} and {burn_in}")

    size = truth.shape[0]
    rho = np.full(size, np.nan)
    start = delay + burn_in
    if start >= size:
        return rho

    current = truth[start:]
    delayed_estimate = estimates[start - delay:size - delay]
    delayed_truth = truth[start - delay:size - delay]
    valid = np.isfinite(delayed_estimate)
    numerator = np.cumsum(np.where(valid, (current - np.where(valid, delayed_estimate, 0.0)) ** 2, 0.0))
    denominator = np.cumsum(np.where(valid, delayed_truth ** 2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        rho[start:] = np.where(denominator > 0, np.sqrt(numerator / denominator), np.nan)
    return rho


def final_value(rho: np.ndarray) -> float:
    """
    Last entry of a rho series

    Raises:
        UndefinedMetricError: If the denominator is zero through the last step
    """
    if rho.size == 0 or not np.isfinite(rho[-1]):
        raise UndefinedMetricError("relative RMSE is undefined: zero denominator through the last step")
    return float(rho[-1])


def delay_floor(truth: Sequence[float], delay: int, k_f: Optional[int] = None) -> float:
    """
    Relative RMSE of the exact derivative delayed by `delay` steps

    Args:
        truth: y^{(q)} samples
        delay: delta
        k_f: Number of steps to include, the whole series by default

    Returns:
        rho at step k_f - 1
    """
    truth = np.asarray(truth, dtype=float)
    if k_f is not None:
        if not delay < k_f <= truth.shape[0]:
            raise InvalidArgumentError(
                f"k_f must satisfy delay < k_f <= {truth.shape[0]}, got {k_f}")
        truth = truth[:k_f]
    return final_value(relative_rmse(truth, truth, delay))


@dataclass
class RmseReport:
    """
    Accuracy of one run

    Attributes:
        algorithm_name: Label of the differentiator
        derivative_order: q
        delay_steps: delta used by the metric
        rho_series: rho_k for k >= delta (NaN where undefined)
        final_rho: Last entry of rho_series
        snr_db: Noise level of the run, inf for clean signals
        params: Configuration used
        seed: Noise seed
    """
    algorithm_name: str
    derivative_order: int
    delay_steps: int
    rho_series: np.ndarray
    final_rho: float
    snr_db: float
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None

    @classmethod
    def from_estimates(cls, algorithm_name: str, truth: Sequence[float], estimates: Sequence[float],
                       delay: int, derivative_order: int, snr_db: float,
                       params: Optional[Dict[str, Any]] = None, seed: Optional[int] = None,
                       burn_in: int = 0) -> "RmseReport":
        rho = relative_rmse(truth, estimates, delay, burn_in=burn_in)
        return cls(algorithm_name=algorithm_name, derivative_order=derivative_order,
                   delay_steps=delay, rho_series=rho[delay:], final_rho=final_value(rho),
                   snr_db=snr_db, params=dict(params or {}), seed=seed)

    def to_csv(self, path: PathLike) -> None:
        """Write `k,rho`, one row per k >= delta; undefined values are left empty."""
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["k", "rho"])
            for offset, value in enumerate(self.rho_series):
                writer.writerow([self.delay_steps + offset,
                                 format_float(value) if np.isfinite(value) else ""])

    def to_summary(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm_name,
            "derivative_order": self.derivative_order,
            "delay_steps": self.delay_steps,
            "snr_db": self.snr_db,
            "seed": self.seed,
            "final_rho": self.final_rho,
            "params": self.params,
        }


def aggregate_over_seeds(reports: Iterable[RmseReport],
                         key_params: Sequence[str] = ()) -> List[Dict[str, Any]]:
    """
    Mean and median final_rho per (algorithm, snr_db)

    Args:
        reports: Per-seed reports
        key_params: Report params that further split the groups, e.g. eta

    Returns:
        One record per key, in order of first appearance
    """
    groups: Dict[Tuple, List[float]] = {}
    for report in reports:
        key = (report.algorithm_name, report.snr_db) + tuple(report.params.get(p) for p in key_params)
        groups.setdefault(key, []).append(report.final_rho)
    records = []
    for key, values in groups.items():
        record = {"algorithm": key[0], "snr_db": key[1]}
        record.update(zip(key_params, key[2:]))
        record.update({
            "runs": len(values),
            "mean_final_rho": float(np.mean(values)),
            "median_final_rho": float(np.median(values)),
        })
        records.append(record)
    return records

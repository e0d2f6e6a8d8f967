# ./numdiff/module_utils/experiment/runner_utils.py

from __future__ import annotations

import csv
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from numdiff.module_utils.common.errors import ConfigError, InvalidArgumentError
from numdiff.module_utils.estimation.estimator import AieDifferentiator
from numdiff.module_utils.experiment.experiment_config import ExperimentConfig
from numdiff.module_utils.metrics.rmse_utils import RmseReport, aggregate_over_seeds, delay_floor
from numdiff.module_utils.signals.csv_utils import format_float, read_csv
from numdiff.module_utils.signals.signal_utils import (
    ManeuverProfile,
    NoiseSpec,
    SampledSignal,
    add_noise,
    generate_maneuver_trajectory,
    generate_single_tone,
    generate_two_tone,
    sensor_noise_covariance,
)

CLEAN = math.inf


def slug(name: str) -> str:
    """File-name safe form of an algorithm label."""
    return re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_").lower() or "algorithm"


def snr_label(snr_db: float) -> str:
    return "inf" if snr_db == math.inf else f"{snr_db:g}"


def build_clean_signal(config: ExperimentConfig) -> SampledSignal:
    """
    Noise-free signal of a scenario, k_f samples long

    Raises:
        InvalidArgumentError: If a csv_input file lacks the truth of the experiment's order
    """
    spec = config.signal
    if config.scenario == "two_tone":
        return generate_two_tone(spec["amplitude_1"], spec["freq_1"], spec["amplitude_2"],
                                 spec["freq_2"], config.sample_time_s, config.k_f)
    if config.scenario == "single_tone":
        return generate_single_tone(spec["amplitude_1"], spec["freq_1"],
                                    config.sample_time_s, config.k_f)
    if config.scenario == "maneuver":
        profile = ManeuverProfile(**(spec.get("maneuver") or {}))
        return generate_maneuver_trajectory(config.k_f * config.sample_time_s,
                                            config.sample_time_s, profile)

    signal = read_csv(spec["input_path"], default_sample_time_s=config.sample_time_s)
    if len(signal) > config.k_f:
        signal = SampledSignal(
            sample_time_s=signal.sample_time_s,
            values=signal.values[:config.k_f],
            truth_derivatives={q: s[:config.k_f] for q, s in signal.truth_derivatives.items()},
        )
    signal.truth(config.derivative_order)
    return signal


def noise_levels(config: ExperimentConfig) -> List[float]:
    return list(config.snr_db_list) or [CLEAN]


@dataclass(frozen=True)
class CellTask:
    """
    One (algorithm, SNR, seed) run

    Attributes:
        index: Position of the cell in the sweep, fixes output order
        config: Experiment the cell belongs to
        record: Algorithm record
        snr_db: Noise level, inf for the clean signal
        seed: Noise seed
        extra_params: Values recorded in the report params (eta of a sweep point)
    """
    index: int
    config: ExperimentConfig
    record: Dict[str, Any]
    snr_db: float
    seed: int
    extra_params: Dict[str, Any] = field(default_factory=dict)

    @property
    def stem(self) -> str:
        parts = [slug(self.record["name"])]
        if "eta" in self.extra_params:
            parts.append(f"eta{self.extra_params['eta']:.6g}")
        parts += [f"snr{snr_label(self.snr_db)}", f"seed{self.seed}"]
        return "__".join(parts)


@dataclass
class CellResult:
    index: int
    report: Optional[RmseReport] = None
    error: Optional[Dict[str, Any]] = None
    files: List[str] = field(default_factory=list)


def _write_trace(path: str, truth: np.ndarray, estimates: np.ndarray,
                 differentiator) -> None:
    outputs = differentiator.outputs if isinstance(differentiator, AieDifferentiator) else None
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["k", "truth", "estimate"] + (["V1", "V2"] if outputs else []))
        for k in range(truth.shape[0]):
            row = [k, format_float(truth[k]),
                   format_float(estimates[k]) if np.isfinite(estimates[k]) else ""]
            if outputs:
                row += [format_float(outputs[k].V1_used[0, 0]), format_float(outputs[k].V2_used)]
            writer.writerow(row)


def run_cell(task: CellTask) -> CellResult:
    """
    Run one cell; failures come back as an error record instead of raising

    Returns:
        CellResult with the report and the files written
    """
    config = task.config
    try:
        clean = build_clean_signal(config)
        spec = NoiseSpec(snr_db=task.snr_db, seed=task.seed, amplitude=config.noise_amplitude)
        noisy = add_noise(clean, spec)
        v2_true = sensor_noise_covariance(clean, spec)

        factory = config.factory()
        factory.sample_time_s = clean.sample_time_s
        differentiator = factory.build(task.record, v2_true=v2_true)
        estimates = differentiator.run(noisy.values)
        truth = clean.truth(config.derivative_order)

        params = dict(factory.resolve(task.record))
        params.update(task.extra_params)
        report = RmseReport.from_estimates(
            task.record["name"], truth, estimates, differentiator.delay_steps,
            config.derivative_order, task.snr_db, params=params, seed=task.seed,
            burn_in=config.burn_in)

        runs_dir = os.path.join(config.output_dir, "runs")
        os.makedirs(runs_dir, exist_ok=True)
        rho_path = os.path.join(runs_dir, f"rho__{task.stem}.csv")
        report.to_csv(rho_path)
        files = [rho_path]
        if config.emit_traces:
            trace_path = os.path.join(runs_dir, f"trace__{task.stem}.csv")
            _write_trace(trace_path, truth, estimates, differentiator)
            files.append(trace_path)
        return CellResult(index=task.index, report=report, files=files)
    except Exception as e:
        return CellResult(index=task.index, error={
            "algorithm": task.record.get("name"),
            "snr_db": task.snr_db,
            "seed": task.seed,
            "msg": str(e),
        })


class ExperimentRunner:
    """
    Runs the cells of an experiment, up to `jobs` at a time, and writes the summaries.

    Results are ordered by cell index whatever the completion order, so
    outputs are identical for any number of jobs.
    """

    def __init__(self, config: ExperimentConfig, jobs: int = 1,
                 progress: Optional[Callable[[CellTask, CellResult], None]] = None):
        """
        Args:
            config: Validated experiment
            jobs: Worker processes, 1 runs inline
            progress: Called once per finished cell
        """
        if jobs < 1:
            raise InvalidArgumentError(f"jobs must be >= 1, got {jobs}")
        self.config = config
        self.jobs = jobs
        self.progress = progress

    def run_cells(self, tasks: Sequence[CellTask]) -> List[CellResult]:
        results: Dict[int, CellResult] = {}
        if self.jobs == 1 or len(tasks) <= 1:
            for task in tasks:
                results[task.index] = run_cell(task)
                self._notify(task, results[task.index])
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as executor:
                futures = [(task, executor.submit(run_cell, task)) for task in tasks]
                for task, future in futures:
                    results[task.index] = future.result()
                    self._notify(task, results[task.index])
        return [results[task.index] for task in tasks]

    def _notify(self, task: CellTask, result: CellResult) -> None:
        if self.progress is not None:
            self.progress(task, result)

    def compare_tasks(self) -> List[CellTask]:
        tasks = []
        for record in self.config.algorithms:
            for snr in noise_levels(self.config):
                for seed in self.config.seeds:
                    tasks.append(CellTask(index=len(tasks), config=self.config, record=record,
                                          snr_db=snr, seed=seed))
        return tasks

    def sweep_base(self) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
        """
        Split the algorithms into the swept AIE/NSE record and the constant lines

        Raises:
            ConfigError: If the experiment has no eta_sweep or no AIE/NSE algorithm
        """
        if self.config.eta_sweep is None:
            raise ConfigError(["eta_sweep: required by the eta-sweep command"])
        for position, record in enumerate(self.config.algorithms):
            if record.get("kind") == "aie" and record.get("mode") == "NSE":
                others = self.config.algorithms[:position] + self.config.algorithms[position + 1:]
                return record, others
        raise ConfigError(["algorithms: eta-sweep needs an AIE algorithm with mode NSE"])

    def sweep_etas(self) -> np.ndarray:
        sweep = self.config.eta_sweep
        if sweep["points"] == 1:
            return np.array([sweep["eta_lower"]])
        if sweep["scale"] == "logarithmic":
            return np.geomspace(sweep["eta_lower"], sweep["eta_upper"], sweep["points"])
        return np.linspace(sweep["eta_lower"], sweep["eta_upper"], sweep["points"])

    def sweep_tasks(self) -> List[CellTask]:
        base, others = self.sweep_base()
        tasks = []
        for eta in self.sweep_etas():
            record = dict(base, v1=float(eta))
            for snr in noise_levels(self.config):
                for seed in self.config.seeds:
                    tasks.append(CellTask(index=len(tasks), config=self.config, record=record,
                                          snr_db=snr, seed=seed, extra_params={"eta": float(eta)}))
        for record in others:
            for snr in noise_levels(self.config):
                for seed in self.config.seeds:
                    tasks.append(CellTask(index=len(tasks), config=self.config, record=record,
                                          snr_db=snr, seed=seed))
        return tasks

    def delay_floors(self, reports: Sequence[RmseReport]) -> List[Dict[str, Any]]:
        """Delay-floor rows for every delta used by a report."""
        delays = sorted({report.delay_steps for report in reports})
        if not delays:
            return []
        truth = build_clean_signal(self.config).truth(self.config.derivative_order)
        rows = []
        for delay in delays:
            try:
                value = delay_floor(truth[self.config.burn_in:], delay)
            except Exception:
                value = math.nan
            rows.append({"algorithm": f"delay_floor_{delay}", "delay_steps": delay, "final_rho": value})
        return rows

    @staticmethod
    def _write_rows(path: str, header: Sequence[str], rows: Sequence[Dict[str, Any]]) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(row.get(column)) for column in header])

    def compare(self) -> Dict[str, Any]:
        """
        Run every (algorithm, SNR, seed) cell and write summary.csv and aggregate.csv

        Returns:
            dict: Paths, cell count and error records
        """
        os.makedirs(self.config.output_dir, exist_ok=True)
        results = self.run_cells(self.compare_tasks())
        reports = [r.report for r in results if r.report is not None]

        summary_path = os.path.join(self.config.output_dir, "summary.csv")
        rows = [report.to_summary() for report in reports] + self.delay_floors(reports)
        self._write_rows(summary_path, ["algorithm", "snr_db", "seed", "delay_steps", "final_rho"], rows)

        aggregate_path = os.path.join(self.config.output_dir, "aggregate.csv")
        self._write_rows(aggregate_path,
                         ["algorithm", "snr_db", "runs", "mean_final_rho", "median_final_rho"],
                         aggregate_over_seeds(reports))
        return self._outcome(results, [summary_path, aggregate_path])

    def eta_sweep(self) -> Dict[str, Any]:
        """
        Final rho of AIE/NSE at every sweep point plus the constant lines of the other algorithms

        Returns:
            dict: Paths, cell count and error records
        """
        tasks = self.sweep_tasks()
        os.makedirs(self.config.output_dir, exist_ok=True)
        results = self.run_cells(tasks)
        reports = [r.report for r in results if r.report is not None]

        sweep_path = os.path.join(self.config.output_dir, "eta_sweep.csv")
        rows = []
        for report in reports:
            row = report.to_summary()
            row["eta"] = report.params.get("eta")
            rows.append(row)
        self._write_rows(sweep_path, ["algorithm", "eta", "snr_db", "seed", "final_rho"], rows)

        aggregate_path = os.path.join(self.config.output_dir, "eta_sweep_aggregate.csv")
        self._write_rows(aggregate_path,
                         ["algorithm", "eta", "snr_db", "runs", "mean_final_rho", "median_final_rho"],
                         aggregate_over_seeds(reports, key_params=("eta",)))
        return self._outcome(results, [sweep_path, aggregate_path])

    @staticmethod
    def _outcome(results: Sequence[CellResult], paths: List[str]) -> Dict[str, Any]:
        errors = [r.error for r in results if r.error is not None]
        files = paths + [path for r in results for path in r.files]
        return {"cells": len(results), "failed_cells": errors, "files": files}


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return snr_label(value) if math.isinf(value) else format_float(value)
    return str(value)

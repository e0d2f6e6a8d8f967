# ./numdiff/module_utils/signals/signal_utils.py

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.special import expit

from numdiff.module_utils.common.errors import InvalidArgumentError

EXAMPLES = r'''
Using:
from numdiff.module_utils.signals.signal_utils import NoiseSpec, add_noise, generate_two_tone

clean = generate_two_tone(1.0, 20.0, 1.0, 30.0, sample_time_s=0.01, num_steps=2000)
noisy = add_noise(clean, NoiseSpec(snr_db=20.0, seed=7))
'''

SUPPORTED_ORDERS = (1, 2)


@dataclass
class SampledSignal:
    """
    Uniformly sampled scalar series y_k = y(k T_s)

    Attributes:
        sample_time_s: Sample time T_s in seconds
        values: Samples y_0 ... y_{N-1}
        truth_derivatives: Optional exact derivatives keyed by order q in {1, 2}
    """
    sample_time_s: float
    values: np.ndarray
    truth_derivatives: Dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.sample_time_s > 0) or not math.isfinite(self.sample_time_s):
            raise InvalidArgumentError(
                f"sample_time_s must be positive, got {self.sample_time_s}")
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        truths = {}
        for order, series in self.truth_derivatives.items():
            if order not in SUPPORTED_ORDERS:
                raise InvalidArgumentError(
                    f"truth derivative order must be 1 or 2, got {order}")
            series = np.asarray(series, dtype=float).reshape(-1)
            if series.shape != self.values.shape:
                raise InvalidArgumentError(
                    f"truth derivative q={order} has {series.shape[0]} samples, "
                    f"expected {self.values.shape[0]}")
            truths[int(order)] = series
        self.truth_derivatives = truths

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def times(self) -> np.ndarray:
        """Sample instants k T_s."""
        return np.arange(len(self)) * self.sample_time_s

    def truth(self, order: int) -> np.ndarray:
        """
        Exact q-th derivative series

        Raises:
            InvalidArgumentError: If the signal carries no truth for `order`
        """
        if order not in self.truth_derivatives:
            raise InvalidArgumentError(f"signal has no truth derivative of order {order}")
        return self.truth_derivatives[order]

    def copy(self, values: Optional[np.ndarray] = None) -> "SampledSignal":
        """Copy, optionally replacing the samples while keeping the truths."""
        return SampledSignal(
            sample_time_s=self.sample_time_s,
            values=np.array(self.values if values is None else values, dtype=float),
            truth_derivatives={q: s.copy() for q, s in self.truth_derivatives.items()},
        )


@dataclass(frozen=True)
class NoiseSpec:
    """
    Additive white-noise request

    Attributes:
        snr_db: Target SNR in decibels, math.inf disables noise
        seed: Seed of the PCG64 generator
        amplitude: Explicit noise amplitude D, overrides snr_db when set
    """
    snr_db: float
    seed: int = 0
    amplitude: Optional[float] = None

    def __post_init__(self):
        if self.seed < 0:
            raise InvalidArgumentError(f"seed must be unsigned, got {self.seed}")
        if self.amplitude is not None and (
                self.amplitude < 0 or not math.isfinite(self.amplitude)):
            raise InvalidArgumentError(
                f"noise amplitude must be finite and non-negative, got {self.amplitude}")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise InvalidArgumentError(f"snr_db must be a number or +inf, got {self.snr_db}")

    @property
    def disabled(self) -> bool:
        return self.amplitude is None and self.snr_db == math.inf


@dataclass(frozen=True)
class ManeuverProfile:
    """
    Lane-change-like relative position: ramp plus a logistic lateral step

    y(t) = initial_offset_m + velocity_mps t
           + lateral_offset_m sigma((t - midpoint_s) / transition_s)
    """
    velocity_mps: float = 0.2
    lateral_offset_m: float = 3.5
    midpoint_s: float = 7.5
    transition_s: float = 0.8
    initial_offset_m: float = 0.0

    def __post_init__(self):
        if not self.transition_s > 0:
            raise InvalidArgumentError(
                f"transition_s must be positive, got {self.transition_s}")


def _check_grid(sample_time_s: float, num_steps: int) -> None:
    if not (sample_time_s > 0) or not math.isfinite(sample_time_s):
        raise InvalidArgumentError(f"sample_time_s must be positive, got {sample_time_s}")
    if num_steps < 1:
        raise InvalidArgumentError(f"num_steps must be at least 1, got {num_steps}")


def rms(values: np.ndarray) -> float:
    """Root mean square of a series."""
    values = np.asarray(values, dtype=float)
    return float(np.sqrt(np.mean(values ** 2))) if values.size else 0.0


def generate_two_tone(amplitude_1: float, freq_1: float,
                      amplitude_2: float, freq_2: float,
                      sample_time_s: float, num_steps: int) -> SampledSignal:
    """
    Sample y(t) = a1 sin(f1 t) + a2 sin(f2 t) with analytic first and second derivatives

    Args:
        amplitude_1: a1
        freq_1: f1 in rad/s
        amplitude_2: a2
        freq_2: f2 in rad/s
        sample_time_s: T_s
        num_steps: Number of samples

    Returns:
        SampledSignal with truth_derivatives for q = 1, 2

    Raises:
        InvalidArgumentError: On non-positive sample time or zero steps
    """
    _check_grid(sample_time_s, num_steps)
    t = np.arange(num_steps) * sample_time_s
    s1, s2 = np.sin(freq_1 * t), np.sin(freq_2 * t)
    c1, c2 = np.cos(freq_1 * t), np.cos(freq_2 * t)
    return SampledSignal(
        sample_time_s=sample_time_s,
        values=amplitude_1 * s1 + amplitude_2 * s2,
        truth_derivatives={
            1: amplitude_1 * freq_1 * c1 + amplitude_2 * freq_2 * c2,
            2: -amplitude_1 * freq_1 ** 2 * s1 - amplitude_2 * freq_2 ** 2 * s2,
        },
    )


def generate_single_tone(amplitude: float, freq: float,
                         sample_time_s: float, num_steps: int) -> SampledSignal:
    """Sample y(t) = a sin(f t); a two-tone whose second amplitude is zero."""
    return generate_two_tone(amplitude, freq, 0.0, 0.0, sample_time_s, num_steps)


def generate_maneuver_trajectory(duration_s: float, sample_time_s: float,
                                 profile: Optional[ManeuverProfile] = None) -> SampledSignal:
    """
    Synthetic evasive-maneuver relative position along the lateral axis

    Args:
        duration_s: Length of the trajectory in seconds
        sample_time_s: T_s
        profile: Shape parameters, defaults to ManeuverProfile()

    Returns:
        SampledSignal of round(duration_s / sample_time_s) samples with truths q = 1, 2
    """
    if not (duration_s > 0) or not math.isfinite(duration_s):
        raise InvalidArgumentError(f"duration_s must be positive, got {duration_s}")
    if not (sample_time_s > 0) or not math.isfinite(sample_time_s):
        raise InvalidArgumentError(f"sample_time_s must be positive, got {sample_time_s}")
    profile = profile or ManeuverProfile()
    num_steps = int(round(duration_s / sample_time_s))
    _check_grid(sample_time_s, num_steps)

    t = np.arange(num_steps) * sample_time_s
    tau = profile.transition_s
    sigma = expit((t - profile.midpoint_s) / tau)
    bump = sigma * (1.0 - sigma)
    height = profile.lateral_offset_m
    return SampledSignal(
        sample_time_s=sample_time_s,
        values=profile.initial_offset_m + profile.velocity_mps * t + height * sigma,
        truth_derivatives={
            1: profile.velocity_mps + height / tau * bump,
            2: height / tau ** 2 * bump * (1.0 - 2.0 * sigma),
        },
    )


def noise_amplitude(signal: SampledSignal, spec: NoiseSpec) -> float:
    """
    Amplitude D of the additive noise D v_k

    D = rms(values) 10^(-snr_db / 20) unless the NoiseSpec carries an explicit amplitude.

    Raises:
        InvalidArgumentError: If the SNR is finite and the signal is all zeros
    """
    if spec.amplitude is not None:
        return float(spec.amplitude)
    if spec.snr_db == math.inf:
        return 0.0
    signal_rms = rms(signal.values)
    if signal_rms == 0.0:
        raise InvalidArgumentError("SNR is undefined for an all-zero signal")
    amplitude = signal_rms * 10.0 ** (-spec.snr_db / 20.0)
    if not (amplitude > 0) or not math.isfinite(amplitude):
        raise InvalidArgumentError(f"snr_db={spec.snr_db} yields noise amplitude {amplitude}")
    return amplitude


def add_noise(signal: SampledSignal, spec: NoiseSpec) -> SampledSignal:
    """
    Add seeded white Gaussian noise D v_k to a copy of the signal

    Args:
        signal: Clean signal
        spec: SNR (or explicit D) and seed

    Returns:
        Noisy copy; truth derivatives are carried through unchanged
    """
    if len(signal) == 0:
        raise InvalidArgumentError("cannot add noise to an empty signal")
    amplitude = noise_amplitude(signal, spec)
    if amplitude == 0.0:
        return signal.copy()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    return signal.copy(signal.values + amplitude * rng.standard_normal(len(signal)))


def sensor_noise_covariance(signal: SampledSignal, spec: NoiseSpec) -> float:
    """V_2,true = D^2 for the noise described by `spec`."""
    return noise_amplitude(signal, spec) ** 2


def snr_db(clean: np.ndarray, noisy: np.ndarray) -> float:
    """Empirical SNR 20 log10(rms(clean) / rms(noisy - clean))."""
    clean = np.asarray(clean, dtype=float)
    noise_rms = rms(np.asarray(noisy, dtype=float) - clean)
    if noise_rms == 0.0:
        return math.inf
    return 20.0 * math.log10(rms(clean) / noise_rms)

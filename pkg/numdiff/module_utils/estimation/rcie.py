# ./numdiff/module_utils/estimation/rcie.py

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from numdiff.module_utils.common.errors import InvalidArgumentError, NumericalError


@dataclass
class RcieConfig:
    """
    Retrospective-cost input estimation settings

    Attributes:
        n_e: Order of the input-estimation subsystem
        n_f: Length of the retrospective filter
        R_z: Residual weight
        R_d: Input weight
        R_theta: Regularisation, a positive-definite l_theta x l_theta matrix
            or a scalar standing for scalar * I
        theta_0: Initial coefficient vector, zeros by default
        normalize_input: Estimate u_hat = C B d_hat, whose leading Markov
            parameter is 1, instead of d_hat itself. R_d and R_theta then
            weigh the normalised input.
    """
    n_e: int
    n_f: int
    R_z: float = 1.0
    R_d: float = 1e-5
    R_theta: Union[float, np.ndarray] = 0.1
    theta_0: Optional[np.ndarray] = None
    normalize_input: bool = True

    def __post_init__(self):
        if self.n_e < 1:
            raise InvalidArgumentError(f"n_e must be >= 1, got {self.n_e}")
        if self.n_f < 1:
            raise InvalidArgumentError(f"n_f must be >= 1, got {self.n_f}")
        if not self.R_z > 0:
            raise InvalidArgumentError(f"R_z must be positive, got {self.R_z}")
        if not self.R_d > 0:
            raise InvalidArgumentError(f"R_d must be positive, got {self.R_d}")

        size = self.l_theta
        r_theta = np.asarray(self.R_theta, dtype=float)
        if r_theta.ndim == 0:
            r_theta = float(r_theta) * np.eye(size)
        if r_theta.shape != (size, size):
            raise InvalidArgumentError(
                f"R_theta must be {size}x{size} for n_e={self.n_e}, got {r_theta.shape}")
        if not np.allclose(r_theta, r_theta.T):
            raise InvalidArgumentError("R_theta must be symmetric")
        try:
            np.linalg.cholesky(r_theta)
        except np.linalg.LinAlgError:
            raise InvalidArgumentError("R_theta must be positive definite")
        self.R_theta = r_theta

        theta_0 = np.zeros(size) if self.theta_0 is None else np.asarray(self.theta_0, dtype=float)
        if theta_0.shape != (size,):
            raise InvalidArgumentError(
                f"theta_0 must have {size} entries, got {theta_0.shape}")
        self.theta_0 = theta_0

    @property
    def l_theta(self) -> int:
        return 2 * self.n_e + 1

    @property
    def k_n(self) -> int:
        return max(self.n_e, self.n_f)


@dataclass
class RcieState:
    """
    Coefficients, RLS covariance and the signal histories of one estimator

    Histories are most-recent-first: dhat_history[0] is d_hat_{k-1},
    z_history[0] is z_{k-1}, phi_history[0] is Phi_{k-1}, markov_history[0]
    is Abar_{k-1}. Entries before the first step are zero.

    Attributes:
        theta: theta_k
        P: P_k
        dhat_history: max(n_e, n_f) past input estimates, normalised when the
            subsystem normalises its input
        z_history: n_e past residuals
        phi_history: n_f past regressors, one row each
        markov_history: Up to n_f - 1 past closed-loop matrices
        step: k, number of samples processed
        start_step: First step at which the input is estimated (k_n - 1)
    """
    theta: np.ndarray
    P: np.ndarray
    dhat_history: np.ndarray
    z_history: np.ndarray
    phi_history: np.ndarray
    markov_history: Tuple[np.ndarray, ...] = field(default_factory=tuple)
    step: int = 0
    start_step: int = 0

    @classmethod
    def initial(cls, config: RcieConfig) -> "RcieState":
        """theta = theta_0, P = R_theta^{-1}, zero histories."""
        return cls(
            theta=config.theta_0.copy(),
            P=np.linalg.inv(config.R_theta),
            dhat_history=np.zeros(config.k_n),
            z_history=np.zeros(config.n_e),
            phi_history=np.zeros((config.n_f, config.l_theta)),
            step=0,
            start_step=config.k_n - 1,
        )

    @property
    def n_e(self) -> int:
        return self.z_history.shape[0]


def build_regressor(state: RcieState, z_k: float) -> np.ndarray:
    """
    Phi_k = [d_hat_{k-1} ... d_hat_{k-n_e}, z_k, z_{k-1} ... z_{k-n_e}]

    Returns:
        Row of length l_theta = 2 n_e + 1
    """
    n_e = state.n_e
    return np.concatenate((state.dhat_history[:n_e], [z_k], state.z_history))


def markov_parameters(abar_history: Sequence[np.ndarray], B: np.ndarray, C: np.ndarray,
                      n_f: int, step: Optional[int] = None) -> np.ndarray:
    """
    Closed-loop Markov parameters H_1 ... H_{n_f}

    H_1 = C B and H_i = C Abar_{k-1} ... Abar_{k-(i-1)} B. H_i is zero when
    the history is too short to form the product, and for i > step when the
    step is given.

    Args:
        abar_history: Abar_{k-1}, Abar_{k-2}, ... most recent first
        B: n x 1 input matrix
        C: 1 x n output matrix
        n_f: Number of parameters
        step: k

    Returns:
        Array of n_f scalars
    """
    B = np.asarray(B, dtype=float).reshape(-1, 1)
    C = np.asarray(C, dtype=float).reshape(1, -1)
    n = B.shape[0]
    if C.shape[1] != n:
        raise InvalidArgumentError(f"B has {n} rows but C has {C.shape[1]} columns")
    for abar in abar_history:
        if np.shape(abar) != (n, n):
            raise InvalidArgumentError(
                f"closed-loop matrices must be {n}x{n}, got {np.shape(abar)}")

    limit = n_f if step is None else min(n_f, step)
    markov = np.zeros(n_f)
    row = C
    for i in range(1, limit + 1):
        if i >= 2:
            if i - 2 >= len(abar_history):
                break
            row = row @ abar_history[i - 2]
        markov[i - 1] = (row @ B).item()
    return markov


def filter_signals(state: RcieState, markov: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Filtered regressor and input estimate

    Phi_f,k = sum_i H_i Phi_{k-i} and d_hat_f,k = sum_i H_i d_hat_{k-i}

    Returns:
        (Phi_f,k, d_hat_f,k)
    """
    n_f = markov.shape[0]
    return markov @ state.phi_history[:n_f], float(markov @ state.dhat_history[:n_f])


def _gamma(phi_tilde: np.ndarray, P: np.ndarray, config: RcieConfig) -> np.ndarray:
    inner = phi_tilde @ P @ phi_tilde.T
    a = 1.0 / config.R_z + inner[0, 0]
    d = 1.0 / config.R_d + inner[1, 1]
    b = 0.5 * (inner[0, 1] + inner[1, 0])
    det = a * d - b * b
    if not np.isfinite(det) or det <= 0:
        raise NumericalError(f"Gamma_k is not invertible (determinant {det})")
    return np.array([[d, -b], [-b, a]]) / det


def rls_update(state: RcieState, phi_k: np.ndarray, phi_f: np.ndarray, dhat_f: float,
               z_k: float, config: RcieConfig) -> RcieState:
    """
    Recursive minimiser of the retrospective cost

    With Phi~ = [Phi_f,k; Phi_k], z~ = [z_k - d_hat_f,k; 0], R~ = diag(R_z, R_d):
    Gamma = (R~^-1 + Phi~ P Phi~^T)^-1, P+ = P - P Phi~^T Gamma Phi~ P,
    theta+ = theta - P Phi~^T Gamma (z~ + Phi~ theta).

    Returns:
        State carrying theta_{k+1} and the re-symmetrised P_{k+1}; histories untouched
    """
    phi_tilde = np.vstack((phi_f, phi_k))
    z_tilde = np.array([z_k - dhat_f, 0.0])
    gamma = _gamma(phi_tilde, state.P, config)
    gain = state.P @ phi_tilde.T @ gamma
    theta = state.theta - gain @ (z_tilde + phi_tilde @ state.theta)
    P = state.P - gain @ phi_tilde @ state.P
    P = 0.5 * (P + P.T)
    return replace(state, theta=theta, P=P)


def estimate_input(state: RcieState, phi_k: np.ndarray) -> float:
    """d_hat_k = Phi_k theta_k, held at d_hat_0 = 0 before the start step."""
    if state.step < state.start_step:
        return 0.0
    return float(phi_k @ state.theta)


def advance_histories(state: RcieState, phi_k: np.ndarray, dhat_k: float, z_k: float) -> RcieState:
    """Shift Phi_k, d_hat_k and z_k into the histories and move to step k + 1."""
    dhat_history = np.roll(state.dhat_history, 1)
    dhat_history[0] = dhat_k
    z_history = np.roll(state.z_history, 1)
    if z_history.size:
        z_history[0] = z_k
    phi_history = np.roll(state.phi_history, 1, axis=0)
    phi_history[0] = phi_k
    return replace(state, dhat_history=dhat_history, z_history=z_history,
                   phi_history=phi_history, step=state.step + 1)


class RcieSubsystem:
    """
    Input-estimation half of the adaptive estimator.

    `estimate` runs one step (regressor, d_hat_k, Markov parameters, filtered
    signals, RLS); `push_closed_loop` records Abar_k once the state estimator
    has assimilated step k.

    With `normalize_input` the histories, the regressor and the RLS work on
    u_hat = C B d_hat and the Markov parameters are divided by C B, so H_1 = 1
    whatever the sample time. `estimate` always returns d_hat.
    """

    def __init__(self, config: RcieConfig, B: np.ndarray, C: np.ndarray):
        self.config = config
        self.B = np.asarray(B, dtype=float).reshape(-1, 1)
        self.C = np.asarray(C, dtype=float).reshape(1, -1)
        self.input_scale = 1.0
        if config.normalize_input:
            if self.C.shape[1] != self.B.shape[0]:
                raise InvalidArgumentError(
                    f"B has {self.B.shape[0]} rows but C has {self.C.shape[1]} columns")
            self.input_scale = (self.C @ self.B).item()
            if self.input_scale == 0.0 or not np.isfinite(self.input_scale):
                raise InvalidArgumentError("normalize_input needs C B != 0")
        self.state = RcieState.initial(config)

    def reset(self) -> None:
        self.state = RcieState.initial(self.config)

    def estimate(self, z_k: float) -> float:
        """
        Input estimate for the current step

        Args:
            z_k: Residual of the current step

        Returns:
            d_hat_k
        """
        state = self.state
        if state.step < state.start_step:
            uhat_k = 0.0
            phi_k = np.zeros(self.config.l_theta)
        else:
            phi_k = build_regressor(state, z_k)
            uhat_k = estimate_input(state, phi_k)
            markov = markov_parameters(state.markov_history, self.B, self.C,
                                       self.config.n_f, step=state.step) / self.input_scale
            phi_f, uhat_f = filter_signals(state, markov)
            state = rls_update(state, phi_k, phi_f, uhat_f, z_k, self.config)
        self.state = advance_histories(state, phi_k, uhat_k, z_k)
        return uhat_k / self.input_scale

    def push_closed_loop(self, abar: np.ndarray) -> None:
        """Record Abar_k = A (I + K_da,k C) as the most recent closed-loop matrix."""
        keep = max(self.config.n_f - 1, 0)
        history = (np.asarray(abar, dtype=float),) + self.state.markov_history
        self.state = replace(self.state, markov_history=history[:keep])

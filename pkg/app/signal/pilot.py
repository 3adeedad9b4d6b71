"""Semi-unitary pilots and the transformed pilot matrix Q."""
from dataclasses import dataclass

import numpy as np

from app.exceptions import ConfigurationError, DimensionError
from app.models.schemas import PilotConfig
from app.numerics import kron


@dataclass(frozen=True)
class TransformedPilot:
    """Q = sqrt(rho) * kron(Q_pilot^T, I_N), shape (tau*N, M*N)."""
    q: np.ndarray
    rho: float
    n_rx: int

    @property
    def obs_dim(self) -> int:
        return self.q.shape[0]

    @property
    def state_dim(self) -> int:
        return self.q.shape[1]

    @property
    def tau(self) -> int:
        return self.q.shape[0] // self.n_rx


def make_pilot(cfg: PilotConfig) -> np.ndarray:
    """
    Build an M x tau pilot with Q_pilot Q_pilot^H = tau I_M.

    For tau == M this is sqrt(tau) I_M. Longer pilots use the first M rows of the
    unnormalised tau-point DFT matrix, which meets the same constraint.

    Args:
        cfg: Pilot configuration

    Returns:
        Complex pilot matrix of shape (M, tau)
    """
    if cfg.tau < cfg.n_tx:
        raise ConfigurationError(f"Pilot length tau={cfg.tau} is shorter than n_tx={cfg.n_tx}")
    if cfg.tau == cfg.n_tx:
        return np.sqrt(cfg.tau) * np.eye(cfg.n_tx, dtype=np.complex128)
    rows = np.arange(cfg.n_tx)[:, None]
    cols = np.arange(cfg.tau)[None, :]
    return np.exp(-2j * np.pi * rows * cols / cfg.tau)


def transform_pilot(pilot: np.ndarray, rho: float, n_rx: int) -> TransformedPilot:
    """Dimension-aligned pilot sqrt(rho) * kron(Q_pilot^T, I_N)."""
    if rho <= 0:
        raise ConfigurationError(f"rho must be positive, got {rho}")
    pilot = np.asarray(pilot, dtype=np.complex128)
    if pilot.ndim != 2:
        raise DimensionError(f"Pilot must be a matrix, got shape {pilot.shape}")
    q = np.sqrt(rho) * kron(pilot.T, np.eye(n_rx))
    return TransformedPilot(q=q, rho=float(rho), n_rx=n_rx)


def rho_for_snr(snr_db: float, sigma_v: float, pilot: np.ndarray, reference_channel_power: float) -> float:
    """
    Transmit-power scale that meets a target SNR.

    Uses SNR = rho * tau * E|h|^2 / sigma_v^2 per received entry.

    Args:
        snr_db: Target SNR in dB
        sigma_v: Noise standard deviation
        pilot: Pilot matrix (M x tau)
        reference_channel_power: Empirical mean |h|^2 of the training prefix

    Returns:
        rho
    """
    if sigma_v <= 0:
        raise ConfigurationError(f"sigma_v must be positive, got {sigma_v}")
    if reference_channel_power <= 0:
        raise ConfigurationError(f"reference_channel_power must be positive, got {reference_channel_power}")
    tau = np.asarray(pilot).shape[1]
    return float(10.0 ** (snr_db / 10.0) * sigma_v ** 2 / (tau * reference_channel_power))

"""Prediction-error metrics, zero-forcing precoding and achievable rate."""
from typing import Iterable, List, Sequence, Union
import logging

import numpy as np
import scipy.linalg as linalg

from app.exceptions import ChannelPredictionError, DimensionError, NumericalError

logger = logging.getLogger(__name__)

ZF_MAX_CONDITION = 1e12
DB_FLOOR = 1e-30


def to_db(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """10 * log10(x) with x floored at DB_FLOOR (-300 dB)."""
    return 10.0 * np.log10(np.maximum(x, DB_FLOOR))


def nse(h_true: np.ndarray, h_pred: np.ndarray) -> float:
    """Normalized squared error ||h - h_hat||^2 / ||h||^2."""
    h_true = np.asarray(h_true)
    h_pred = np.asarray(h_pred)
    if h_true.shape != h_pred.shape:
        raise DimensionError(f"NSE operands differ in shape: {h_true.shape} vs {h_pred.shape}")
    power = np.vdot(h_true, h_true).real
    if power <= 0:
        raise ChannelPredictionError("NSE is undefined for an all-zero true channel")
    err = h_true - h_pred
    return float(np.vdot(err, err).real / power)


def nmse(nses: Sequence[float]) -> float:
    """Mean of linear NSEs."""
    values = np.asarray(list(nses), dtype=float)
    if values.size == 0:
        raise ChannelPredictionError("NMSE of an empty NSE list")
    return float(values.mean())


def nmse_at_horizons(nses: Sequence[float], horizons: Iterable[int]) -> List[float]:
    """NMSE over the first h steps for each horizon h."""
    values = np.asarray(list(nses), dtype=float)
    out = []
    for h in horizons:
        if h < 1 or h > values.size:
            raise ChannelPredictionError(f"Horizon {h} outside 1..{values.size}")
        out.append(float(values[:h].mean()))
    return out


def zf_precoder(h_pred_matrix: np.ndarray) -> np.ndarray:
    """
    Zero-forcing precoder P = (H^H H)^{-1} H^H.

    Args:
        h_pred_matrix: Predicted channel matrix (N x M), N >= M, full column rank

    Returns:
        Precoder of shape (M x N) with P H = I_M
    """
    h = np.asarray(h_pred_matrix, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] < h.shape[1]:
        raise DimensionError(f"ZF precoding needs N >= M, got channel of shape {h.shape}")
    cond = np.linalg.cond(h)
    if not np.isfinite(cond) or cond > ZF_MAX_CONDITION:
        raise NumericalError(f"Predicted channel is rank deficient (cond={cond:.3e})")
    gram = h.conj().T @ h
    return linalg.solve(gram, h.conj().T, assume_a="her")


def achievable_rate(h_pred_matrix: np.ndarray, rho: float, sigma_v: float, n_tx: int) -> float:
    """
    log2 det(I_M + rho / (M sigma_v^2) * P H H^H P^H) with the ZF precoder P of H.

    Args:
        h_pred_matrix: Predicted channel matrix (N x M)
        rho: Transmit-power scale
        sigma_v: Noise standard deviation
        n_tx: UE antennas M

    Returns:
        Rate in bits/s/Hz
    """
    if sigma_v <= 0:
        raise ChannelPredictionError(f"sigma_v must be positive, got {sigma_v}")
    h = np.asarray(h_pred_matrix, dtype=np.complex128)
    precoder = zf_precoder(h)
    effective = precoder @ h
    snr = rho / (n_tx * sigma_v ** 2)
    sign, logdet = np.linalg.slogdet(np.eye(n_tx) + snr * effective @ effective.conj().T)
    if sign.real <= 0:
        raise NumericalError("Rate determinant is not positive")
    return float(logdet / np.log(2.0))


def horizon_rate(h_pred_frames: np.ndarray, rho: float, sigma_v: float) -> float:
    """Mean per-slot achievable rate over predicted frames of shape (L, N, M)."""
    frames = np.asarray(h_pred_frames)
    if frames.shape[0] == 0:
        raise ChannelPredictionError("Rate over an empty horizon")
    n_tx = frames.shape[2]
    return float(np.mean([achievable_rate(h, rho, sigma_v, n_tx) for h in frames]))

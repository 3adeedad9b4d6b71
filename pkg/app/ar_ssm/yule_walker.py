"""AR(p) identification from noisy signals via the Yule-Walker equations."""
from dataclasses import dataclass
from typing import List, Optional
import logging

import numpy as np

from app.exceptions import DimensionError
from app.numerics import hermitize, pinv, psd_clip, solve_hermitian
from app.signal.observation import SignalSequence
from app.signal.pilot import TransformedPilot

logger = logging.getLogger(__name__)

EPSILON_SCALE = 1e-6


@dataclass(frozen=True)
class AutocovarianceSet:
    """Channel autocovariance estimates C_k = E[h_{t-k} h_t^H] for k = 0..p."""
    c_hat: List[np.ndarray]

    @property
    def p(self) -> int:
        return len(self.c_hat) - 1

    @property
    def dim(self) -> int:
        return self.c_hat[0].shape[0]

    def lag(self, k: int) -> np.ndarray:
        """C_k for any integer k, using C_{-k} = C_k^H."""
        return self.c_hat[k] if k >= 0 else self.c_hat[-k].conj().T


@dataclass(frozen=True)
class ArModel:
    """Identified AR(p) dynamics h_t = Phi [h_{t-1}; ...; h_{t-p}] + u_t."""
    p: int
    phi: np.ndarray
    sigma_u: np.ndarray
    epsilon: float

    @property
    def dim(self) -> int:
        return self.phi.shape[0]

    def coefficient(self, j: int) -> np.ndarray:
        """Phi_j for j = 1..p."""
        return self.phi[:, (j - 1) * self.dim: j * self.dim]


def empirical_signal_autocov(signals: SignalSequence, k: int) -> np.ndarray:
    """
    (1/(T-1)) * sum_t y_{t-k} y_t^H, with t running over |k|+1..T.

    The 1/(T-1) normalisation is applied at every lag. A negative lag sums y_{t+|k|} y_t^H,
    which is the Hermitian transpose of the estimate at |k|.
    """
    y = signals.observations
    T = y.shape[0]
    m = abs(k)
    if m >= T or T < 2:
        raise DimensionError(f"Lag k={k} out of range for T={T}")
    if k < 0:
        return (y[m:].T @ y[: T - m].conj()) / (T - 1)
    return (y[: T - k].T @ y[k:].conj()) / (T - 1)


def channel_autocov_from_signals(
    signals: SignalSequence,
    q: TransformedPilot,
    sigma_v: float,
    k: int
) -> np.ndarray:
    """
    Channel autocovariance at lag k recovered from received signals.

    C_k = Q^+ (R_k - [k == 0] sigma_v^2 I) (Q^H)^+

    Args:
        signals: Received signals
        q: Transformed pilot used for the observations
        sigma_v: Noise standard deviation
        k: Lag

    Returns:
        MN x MN autocovariance estimate
    """
    r_k = empirical_signal_autocov(signals, k)
    if k == 0:
        r_k = r_k - sigma_v ** 2 * np.eye(r_k.shape[0])
    q_pinv = pinv(q.q)
    return q_pinv @ r_k @ pinv(q.q.conj().T)


def estimate_autocovariances(
    signals: SignalSequence,
    q: TransformedPilot,
    sigma_v: float,
    p: int
) -> AutocovarianceSet:
    """Lags 0..p with C_0 symmetrised."""
    lags = [channel_autocov_from_signals(signals, q, sigma_v, k) for k in range(p + 1)]
    lags[0] = hermitize(lags[0])
    return AutocovarianceSet(c_hat=lags)


def block_toeplitz(autocov: AutocovarianceSet) -> np.ndarray:
    """C_all with block (i, j) = C_{i-j}, i, j = 0..p-1."""
    p, d = autocov.p, autocov.dim
    c_all = np.zeros((p * d, p * d), dtype=np.complex128)
    for i in range(p):
        for j in range(p):
            c_all[i * d:(i + 1) * d, j * d:(j + 1) * d] = autocov.lag(i - j)
    return c_all


def default_epsilon(c_all: np.ndarray) -> float:
    """EPSILON_SCALE times the average diagonal of C_all."""
    return float(EPSILON_SCALE * np.real(np.trace(c_all)) / c_all.shape[0])


def fit_ar(autocov: AutocovarianceSet, epsilon: Optional[float] = None) -> ArModel:
    """
    Solve the Yule-Walker equations for Phi and Sigma_u.

    Phi^H = (C_all + eps I)^{-1} C with C = [C_1; ...; C_p], and Sigma_u = C_0 - Phi C,
    symmetrised and clipped to the PSD cone.

    Args:
        autocov: Autocovariances for lags 0..p
        epsilon: Diagonal loading (None = scaled default)

    Returns:
        Fitted AR model
    """
    p, d = autocov.p, autocov.dim
    if p < 1:
        raise DimensionError("fit_ar needs autocovariances for lags 0..p with p >= 1")

    c_all = block_toeplitz(autocov)
    c_stack = np.vstack([autocov.lag(k) for k in range(1, p + 1)])
    eps = default_epsilon(c_all) if epsilon is None else float(epsilon)

    phi_h = solve_hermitian(hermitize(c_all) + eps * np.eye(p * d), c_stack)
    phi = phi_h.conj().T

    raw_sigma_u = hermitize(autocov.lag(0) - phi @ c_stack)
    sigma_u = psd_clip(raw_sigma_u)
    removed = np.linalg.norm(sigma_u - raw_sigma_u)
    if removed > 1e-8 * max(abs(np.trace(raw_sigma_u)), 1e-300):
        logger.warning(f"Sigma_u was clipped to PSD (Frobenius change {removed:.3e})")

    logger.info(f"Fitted AR({p}) on {d}-dim channel, epsilon={eps:.3e}")
    return ArModel(p=p, phi=phi, sigma_u=sigma_u, epsilon=eps)

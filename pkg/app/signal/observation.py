"""Noisy pilot observations y_t = Q h_t + v_t."""
from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np

from app.channel.generators import ChannelSequence
from app.exceptions import DimensionError, NumericalError
from app.numerics import complex_gaussian
from app.signal.pilot import TransformedPilot

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SignalSequence:
    """Received signal vectors, shape (T, tau*N)."""
    observations: np.ndarray
    sigma_v: float
    rho: float
    seed: Optional[int] = None

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=np.complex128)
        if obs.ndim != 2:
            raise DimensionError(f"observations must have shape (T, tau*N), got {obs.shape}")
        if not np.all(np.isfinite(obs)):
            raise NumericalError("Observations contain non-finite entries")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    @property
    def length(self) -> int:
        return self.observations.shape[0]

    @property
    def obs_dim(self) -> int:
        return self.observations.shape[1]

    def slice(self, start: int, stop: int) -> "SignalSequence":
        return SignalSequence(
            observations=self.observations[start:stop],
            sigma_v=self.sigma_v,
            rho=self.rho,
            seed=self.seed,
        )


def observe(channels: ChannelSequence, q: TransformedPilot, sigma_v: float, seed: int) -> SignalSequence:
    """
    Pass a channel sequence through the pilot and add circular Gaussian noise.

    Args:
        channels: Ground-truth channels
        q: Transformed pilot
        sigma_v: Noise standard deviation (0 gives noiseless observations)
        seed: Noise seed

    Returns:
        Signal sequence with one observation per slot
    """
    h = channels.vectors()
    if h.shape[1] != q.state_dim:
        raise DimensionError(f"Channel vectors have width {h.shape[1]}, pilot expects {q.state_dim}")
    clean = h @ q.q.T
    rng = np.random.default_rng(seed)
    noise = complex_gaussian(rng, clean.shape, scale=sigma_v)
    logger.debug(f"Observed {channels.length} slots at sigma_v={sigma_v}, rho={q.rho:.4g}")
    return SignalSequence(observations=clean + noise, sigma_v=float(sigma_v), rho=q.rho, seed=seed)


def measured_snr_db(channels: ChannelSequence, q: TransformedPilot, sigma_v: float) -> float:
    """Per-entry received signal power over noise power, in dB."""
    clean = channels.vectors() @ q.q.T
    return float(10.0 * np.log10(np.mean(np.abs(clean) ** 2) / sigma_v ** 2))

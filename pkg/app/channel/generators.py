"""Ground-truth channel generators: sum-of-sinusoids surrogate and exact AR oracle."""
from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np

from app.exceptions import ConfigurationError, DimensionError, NumericalError, UnstableModelError
from app.models.schemas import DynamicCondition, SurrogateChannelParams
from app.numerics import block_companion, complex_gaussian, covariance_factor, spectral_radius

logger = logging.getLogger(__name__)

AR_BURN_IN = 500


@dataclass(frozen=True)
class ChannelSequence:
    """Time series of N x M channel matrices, one per slot."""
    frames: np.ndarray
    slot_ms: float
    seed: Optional[int] = None

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.complex128)
        if frames.ndim != 3:
            raise DimensionError(f"frames must have shape (T, N, M), got {frames.shape}")
        if not np.all(np.isfinite(frames)):
            raise NumericalError("Channel frames contain non-finite entries")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def length(self) -> int:
        return self.frames.shape[0]

    @property
    def n_rx(self) -> int:
        return self.frames.shape[1]

    @property
    def n_tx(self) -> int:
        return self.frames.shape[2]

    def vectors(self) -> np.ndarray:
        """Column-stacked vec(H_t) for every slot, shape (T, M*N)."""
        return self.frames.transpose(0, 2, 1).reshape(self.length, -1)

    def mean_power(self) -> float:
        """Empirical per-entry E|h|^2."""
        return float(np.mean(np.abs(self.frames) ** 2))

    def slice(self, start: int, stop: int) -> "ChannelSequence":
        return ChannelSequence(frames=self.frames[start:stop], slot_ms=self.slot_ms, seed=self.seed)

    @classmethod
    def from_vectors(cls, vectors: np.ndarray, n_rx: int, n_tx: int, slot_ms: float,
                     seed: Optional[int] = None) -> "ChannelSequence":
        """Rebuild frames from column-stacked channel vectors."""
        vectors = np.asarray(vectors)
        if vectors.ndim != 2 or vectors.shape[1] != n_rx * n_tx:
            raise DimensionError(f"Expected vectors of width {n_rx * n_tx}, got shape {vectors.shape}")
        frames = vectors.reshape(vectors.shape[0], n_tx, n_rx).transpose(0, 2, 1)
        return cls(frames=frames, slot_ms=slot_ms, seed=seed)


def coherence_time(cond: DynamicCondition) -> float:
    """Coherence time T_c = 540 / (v * f) in milliseconds (v in km/h, f in GHz)."""
    if cond.v <= 0 or cond.f <= 0:
        raise ConfigurationError(f"Speed and frequency must be positive, got v={cond.v}, f={cond.f}")
    return 540.0 / (cond.v * cond.f)


def path_powers(params: SurrogateChannelParams) -> np.ndarray:
    """Normalized per-path power profile (sums to one)."""
    weights = np.exp(-params.power_decay * np.arange(params.n_paths))
    if params.rician_k_db != 0.0 and params.n_paths > 1:
        k_factor = 10.0 ** (params.rician_k_db / 10.0)
        nlos = weights[1:] / weights[1:].sum()
        return np.concatenate([[k_factor / (k_factor + 1.0)], nlos / (k_factor + 1.0)])
    return weights / weights.sum()


def generate_surrogate(
    cond: DynamicCondition,
    params: SurrogateChannelParams,
    n_rx: int,
    n_tx: int,
    length: int
) -> ChannelSequence:
    """
    Sum-of-sinusoids multipath channel.

    Each path l contributes a_l * exp(j(2*pi*f_D*cos(theta_l)*t*dt + phi_{n,m,l})) where the array
    phase phi_{n,m,l} is a half-wavelength ULA progression over receive and transmit antennas plus a
    random path phase.

    Args:
        cond: Mobility condition; fixes Doppler and slot duration
        params: Multipath profile and seeds
        n_rx: BS antennas N
        n_tx: UE antennas M
        length: Number of slots

    Returns:
        Deterministic channel sequence for the given seeds
    """
    if length < 1 or n_rx < 1 or n_tx < 1:
        raise ConfigurationError(f"Surrogate needs length, n_rx and n_tx >= 1, got {length}, {n_rx}, {n_tx}")

    angle_rng = np.random.default_rng(params.angle_seed)
    doppler_angles = angle_rng.uniform(0.0, 2.0 * np.pi, params.n_paths)
    arrival = angle_rng.uniform(-np.pi / 2, np.pi / 2, params.n_paths)
    departure = angle_rng.uniform(-np.pi / 2, np.pi / 2, params.n_paths)
    path_phase = np.random.default_rng(params.phase_seed).uniform(0.0, 2.0 * np.pi, params.n_paths)

    amplitudes = np.sqrt(path_powers(params))
    slot_s = cond.slot_ms * 1e-3
    t = np.arange(length)[:, None]
    temporal = amplitudes * np.exp(1j * 2.0 * np.pi * cond.doppler_hz * np.cos(doppler_angles) * t * slot_s)

    n = np.arange(n_rx)[:, None, None]
    m = np.arange(n_tx)[None, :, None]
    spatial = np.exp(1j * (path_phase + np.pi * n * np.sin(arrival) + np.pi * m * np.sin(departure)))

    frames = np.einsum("tl,nml->tnm", temporal, spatial)
    logger.debug(
        f"Generated surrogate channel: N={n_rx}, M={n_tx}, T={length}, "
        f"slot={cond.slot_ms:.4f} ms, f_D={cond.doppler_hz:.1f} Hz"
    )
    return ChannelSequence(frames=frames, slot_ms=cond.slot_ms, seed=params.angle_seed)


def generate_ar_oracle(
    phi: np.ndarray,
    sigma_u: np.ndarray,
    n_rx: int,
    n_tx: int,
    p: int,
    length: int,
    seed: int,
    initial: Optional[np.ndarray] = None,
    slot_ms: float = 1.0
) -> ChannelSequence:
    """
    Exact vector AR(p) channel h_t = sum_j Phi_j h_{t-j} + u_t.

    Without an initial state the recursion starts at zero and runs AR_BURN_IN steps before emitting.
    With an initial state (h_0, or the stacked [h_0; h_{-1}; ...]) the first frame is h_0 and no
    burn-in is applied.

    Args:
        phi: Coefficient stack [Phi_1 ... Phi_p], shape (MN, pMN)
        sigma_u: Innovation covariance (MN x MN), Hermitian PSD
        n_rx: BS antennas N
        n_tx: UE antennas M
        p: AR order
        length: Number of emitted slots
        seed: RNG seed for the innovations
        initial: Optional initial state
        slot_ms: Slot duration recorded on the sequence

    Returns:
        Channel sequence
    """
    mn = n_rx * n_tx
    phi = np.asarray(phi, dtype=np.complex128).reshape(mn, p * mn)
    sigma_u = np.asarray(sigma_u, dtype=np.complex128).reshape(mn, mn)

    companion = block_companion(phi, mn)
    radius = spectral_radius(companion)
    if radius >= 1.0:
        raise UnstableModelError(f"AR oracle companion matrix has spectral radius {radius:.4f} >= 1")

    rng = np.random.default_rng(seed)
    factor = covariance_factor(sigma_u)

    def innovation() -> np.ndarray:
        return factor @ complex_gaussian(rng, mn)

    state = np.zeros(p * mn, dtype=np.complex128)
    out = np.empty((length, mn), dtype=np.complex128)
    if initial is None:
        for _ in range(AR_BURN_IN):
            h_next = phi @ state + innovation()
            state = np.concatenate([h_next, state[:-mn]])
        start = 0
    else:
        init = np.asarray(initial, dtype=np.complex128).ravel()
        state[: init.size] = init
        if length > 0:
            out[0] = state[:mn]
        start = 1

    for t in range(start, length):
        h_next = phi @ state + innovation()
        state = np.concatenate([h_next, state[:-mn]])
        out[t] = h_next

    return ChannelSequence.from_vectors(out, n_rx, n_tx, slot_ms=slot_ms, seed=seed)

"""Augmented linear-Gaussian state-space model built from an identified AR model."""
from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np
import scipy.linalg as linalg

from app.ar_ssm.yule_walker import ArModel, AutocovarianceSet, estimate_autocovariances, fit_ar
from app.exceptions import DimensionError
from app.numerics import block_companion, spectral_radius
from app.signal.observation import SignalSequence
from app.signal.pilot import TransformedPilot

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ssm:
    """
    x_{t+1} = A x_t + B u_t,  y_t = D x_t + v_t.

    The latent state stacks p consecutive channel vectors [h_t; h_{t-1}; ...; h_{t-p+1}].
    """
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    q: TransformedPilot
    sigma_u: np.ndarray
    sigma_v: float
    phi: np.ndarray

    @property
    def mn(self) -> int:
        return self.b.shape[1]

    @property
    def state_dim(self) -> int:
        return self.a.shape[0]

    @property
    def obs_dim(self) -> int:
        return self.d.shape[0]

    @property
    def p(self) -> int:
        return self.state_dim // self.mn

    @property
    def sigma_v_matrix(self) -> np.ndarray:
        return self.sigma_v ** 2 * np.eye(self.obs_dim)

    @property
    def process_noise(self) -> np.ndarray:
        """B Sigma_u B^H."""
        return self.b @ self.sigma_u @ self.b.conj().T

    def extract(self, x: np.ndarray) -> np.ndarray:
        """Channel vector B^T x (the first MN entries of the state)."""
        return self.b.T @ x

    def stability_margin(self) -> float:
        return 1.0 - spectral_radius(self.a)


def build_ssm(ar: ArModel, q: TransformedPilot, sigma_v: float) -> Ssm:
    """
    Companion-form SSM: A has Phi as top block-row and identity sub-diagonal blocks,
    B = [I; 0] and D = Q B^T.

    Args:
        ar: Identified AR model
        q: Transformed pilot
        sigma_v: Noise standard deviation

    Returns:
        State-space model
    """
    mn = ar.dim
    if q.state_dim != mn:
        raise DimensionError(f"Pilot maps {q.state_dim}-dim channels, AR model has {mn}")
    a = block_companion(ar.phi, mn)
    b = np.zeros((ar.p * mn, mn), dtype=np.complex128)
    b[:mn, :] = np.eye(mn)
    d = q.q @ b.T
    return Ssm(a=a, b=b, d=d, q=q, sigma_u=ar.sigma_u, sigma_v=float(sigma_v), phi=ar.phi)


def identify_ssm(
    signals: SignalSequence,
    q: TransformedPilot,
    sigma_v: float,
    p: int,
    epsilon: Optional[float] = None
) -> tuple[Ssm, AutocovarianceSet]:
    """
    Estimate autocovariances, fit AR(p) and build the SSM from received signals only.

    Returns:
        Tuple of (ssm, autocovariance set)
    """
    autocov = estimate_autocovariances(signals, q, sigma_v, p)
    ar = fit_ar(autocov, epsilon)
    ssm = build_ssm(ar, q, sigma_v)
    radius = spectral_radius(ssm.a)
    logger.info(f"Identified SSM: state_dim={ssm.state_dim}, spectral radius={radius:.4f}")
    if radius >= 1.0:
        logger.warning(f"Identified transition matrix is not Schur-stable (radius={radius:.4f})")
    return ssm, autocov


def initial_posterior_covariance(autocov: AutocovarianceSet, p: int) -> np.ndarray:
    """P_{0|0} = blockdiag(C_0, ..., C_0) with p copies."""
    return linalg.block_diag(*([autocov.lag(0)] * p))

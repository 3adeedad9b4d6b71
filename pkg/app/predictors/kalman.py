"""Conventional model-based filter-then-predict (ARKF)."""
from dataclasses import dataclass, replace
from typing import Optional
import logging

import numpy as np

from app.ar_ssm.ssm import Ssm, initial_posterior_covariance
from app.exceptions import DimensionError
from app.numerics import hermitize, solve_hermitian
from app.predictors.base_predictor import BasePredictor, EvaluationWindow
from app.predictors.trace import PredictionTrace, empty_trace
from app.signal.observation import SignalSequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KalmanState:
    """Prior/posterior moments of the latent state and the predicted signal moments."""
    x_prior: np.ndarray
    p_prior: np.ndarray
    x_post: np.ndarray
    p_post: np.ndarray
    y_pred: np.ndarray
    s_pred: np.ndarray
    gain: Optional[np.ndarray] = None


def initial_kalman_state(ssm: Ssm, p_post: np.ndarray, x_post: Optional[np.ndarray] = None) -> KalmanState:
    """
    Posterior at t = 0. Prior and signal moments are placeholders until the first predict step.

    Args:
        ssm: State-space model
        p_post: P_{0|0}
        x_post: x_{0|0} (zeros by default)
    """
    n, m = ssm.state_dim, ssm.obs_dim
    x0 = np.zeros(n, dtype=np.complex128) if x_post is None else np.asarray(x_post, dtype=np.complex128)
    p0 = np.asarray(p_post, dtype=np.complex128)
    if p0.shape != (n, n):
        raise DimensionError(f"P_0|0 must be {n}x{n}, got {p0.shape}")
    return KalmanState(
        x_prior=x0.copy(),
        p_prior=p0.copy(),
        x_post=x0,
        p_post=p0,
        y_pred=np.zeros(m, dtype=np.complex128),
        s_pred=np.eye(m, dtype=np.complex128),
    )


def kalman_gain(p_prior: np.ndarray, s_pred: np.ndarray, ssm: Ssm) -> np.ndarray:
    """K = P D^H S^{-1}, computed as (S^{-1} D P)^H."""
    return solve_hermitian(s_pred, ssm.d @ p_prior).conj().T


def kf_filter_step(state: KalmanState, y_t: np.ndarray, ssm: Ssm) -> KalmanState:
    """
    Fuse the prior with the observation y_t.

    Returns:
        State with x_post = x_prior + K (y_t - y_pred) and P_post = P_prior - K S K^H
    """
    y_t = np.asarray(y_t, dtype=np.complex128)
    if y_t.shape != (ssm.obs_dim,):
        raise DimensionError(f"Observation has shape {y_t.shape}, expected ({ssm.obs_dim},)")
    gain = kalman_gain(state.p_prior, state.s_pred, ssm)
    x_post = state.x_prior + gain @ (y_t - state.y_pred)
    p_post = hermitize(state.p_prior - gain @ state.s_pred @ gain.conj().T)
    return replace(state, x_post=x_post, p_post=p_post, gain=gain)


def kf_predict_step(state: KalmanState, ssm: Ssm) -> KalmanState:
    """Propagate the posterior through the transition and observation models."""
    x_prior = ssm.a @ state.x_post
    p_prior = hermitize(ssm.a @ state.p_post @ ssm.a.conj().T + ssm.process_noise)
    y_pred = ssm.d @ x_prior
    s_pred = hermitize(ssm.d @ p_prior @ ssm.d.conj().T + ssm.sigma_v_matrix)
    return replace(state, x_prior=x_prior, p_prior=p_prior, y_pred=y_pred, s_pred=s_pred)


def arkf_predict(
    signals: SignalSequence,
    ssm: Ssm,
    init: KalmanState,
    horizon: int,
    warmup: int = 0
) -> PredictionTrace:
    """
    Run the filter-then-predict recursion and record one-step channel predictions.

    Record i holds h_{s+1|s} for s = warmup + i, i.e. the prediction of the channel at index
    warmup + i of the signal window made from the observations before it.

    Args:
        signals: Received signals of the evaluation window
        ssm: State-space model
        init: Posterior at t = 0
        horizon: Number of recorded predictions L
        warmup: Observations filtered before the first record

    Returns:
        Prediction trace with h_pred, y_pred, x_post and the filter gains used
    """
    if warmup + horizon > signals.length:
        raise DimensionError(f"warmup + horizon = {warmup + horizon} exceeds {signals.length} observations")
    if horizon == 0:
        return empty_trace(ssm.mn, ssm.obs_dim)

    state = kf_predict_step(init, ssm)
    h_pred, y_pred, x_post, gains = [], [], [], []
    total = warmup + horizon
    for s in range(total):
        if s >= warmup:
            h_pred.append(ssm.extract(state.x_prior))
            y_pred.append(state.y_pred)
            x_post.append(state.x_post)
        if s < total - 1:
            state = kf_filter_step(state, signals.observations[s], ssm)
            gains.append(state.gain)
            state = kf_predict_step(state, ssm)

    logger.debug(f"ARKF produced {horizon} predictions after {warmup} warm-up steps")
    return PredictionTrace(
        h_pred=np.array(h_pred),
        y_pred=np.array(y_pred),
        x_post=np.array(x_post),
        filter_gains=gains,
    )


class ArkfPredictor(BasePredictor):
    """Conventional Kalman filter-then-predict on the identified SSM."""

    def __init__(self):
        super().__init__(name="ARKF", description="Kalman filter-then-predict with the covariance-derived gain")

    def predict(self, window: EvaluationWindow) -> PredictionTrace:
        p_post = initial_posterior_covariance(window.autocov, window.ssm.p)
        init = initial_kalman_state(window.ssm, p_post)
        return arkf_predict(window.test_signals(), window.ssm, init, window.horizon, window.warmup)

"""Hybrid filter-then-predict with a learned gain: rollout, losses, training and testing."""
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple
import logging
import time

import numpy as np

from app.ar_ssm.ssm import Ssm
from app.channel.generators import ChannelSequence
from app.exceptions import ConfigurationError, DimensionError, NumericalError
from app.kpin.network import (
    BpttAccumulator,
    ForwardTape,
    GainFeatures,
    KpinNetwork,
    KpinParameters,
    RecurrentState,
    forward,
)
from app.kpin.optim import Adam
from app.models.schemas import TrainConfig
from app.numerics import complex_gaussian
from app.predictors.trace import PredictionTrace, empty_trace
from app.signal.observation import SignalSequence

logger = logging.getLogger(__name__)

EpochCallback = Callable[[int, float, KpinNetwork], None]


@dataclass(frozen=True)
class HybridState:
    """
    Filter state between two observations.

    x_prior is x_{t|t-1}; x_post_prev and x_prior_prev are x_{t-1|t-1} and x_{t-1|t-2},
    whose difference is the state feature of the next gain evaluation.
    """
    x_prior: np.ndarray
    y_pred: np.ndarray
    x_post_prev: np.ndarray
    x_prior_prev: np.ndarray
    recurrent: RecurrentState
    gain: Optional[np.ndarray] = None
    tape: Optional[ForwardTape] = None


@dataclass
class HybridRollout:
    """Per-step records of one rollout, in time order."""
    x_prior: List[np.ndarray] = field(default_factory=list)
    x_post: List[np.ndarray] = field(default_factory=list)
    y_pred: List[np.ndarray] = field(default_factory=list)
    gains: List[np.ndarray] = field(default_factory=list)
    features: List[GainFeatures] = field(default_factory=list)
    tapes: List[Optional[ForwardTape]] = field(default_factory=list)
    hidden: List[np.ndarray] = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.x_post)


@dataclass
class TrainResult:
    """Trained network with its per-epoch objective and wall time."""
    net: KpinNetwork
    losses: List[float]
    epoch_ms: List[float]

    @property
    def mean_epoch_ms(self) -> Optional[float]:
        return float(np.mean(self.epoch_ms)) if self.epoch_ms else None


def initial_hybrid_state(ssm: Ssm, net: KpinNetwork, x_post: Optional[np.ndarray] = None) -> HybridState:
    """State at t = 0 from x_{0|0} (zeros by default), with x_{0|-1} = x_{0|0}."""
    x0 = np.zeros(ssm.state_dim, dtype=np.complex128) if x_post is None else np.asarray(x_post, dtype=np.complex128)
    if x0.shape != (ssm.state_dim,):
        raise DimensionError(f"x_0|0 has shape {x0.shape}, expected ({ssm.state_dim},)")
    x_prior = ssm.a @ x0
    return HybridState(
        x_prior=x_prior,
        y_pred=ssm.d @ x_prior,
        x_post_prev=x0,
        x_prior_prev=x0.copy(),
        recurrent=net.initial_state(),
    )


def hybrid_ftp_step(
    ssm: Ssm,
    net: KpinNetwork,
    state: HybridState,
    y_t: np.ndarray,
    gain_override: Optional[np.ndarray] = None
) -> Tuple[HybridState, np.ndarray, np.ndarray]:
    """
    Filter y_t with the learned gain and predict the next slot.

    Args:
        ssm: State-space model
        net: Gain network
        state: State holding x_{t|t-1}
        y_t: Received signal at t
        gain_override: Gain used instead of the network output

    Returns:
        Tuple of (next state, h_{t+1|t}, y_{t+1|t})
    """
    y_t = np.asarray(y_t, dtype=np.complex128)
    if y_t.shape != (ssm.obs_dim,):
        raise DimensionError(f"Observation has shape {y_t.shape}, expected ({ssm.obs_dim},)")

    feats = GainFeatures(delta_y=y_t - state.y_pred, delta_x=state.x_post_prev - state.x_prior_prev)
    if gain_override is None:
        gain, recurrent, tape = forward(net, feats, state.recurrent)
    else:
        gain, recurrent, tape = np.asarray(gain_override, dtype=np.complex128), state.recurrent, None
        if gain.shape != (ssm.state_dim, ssm.obs_dim):
            raise DimensionError(f"Injected gain has shape {gain.shape}")

    x_post = state.x_prior + gain @ feats.delta_y
    x_prior = ssm.a @ x_post
    y_pred = ssm.d @ x_prior
    next_state = HybridState(
        x_prior=x_prior,
        y_pred=y_pred,
        x_post_prev=x_post,
        x_prior_prev=state.x_prior,
        recurrent=recurrent,
        gain=gain,
        tape=tape,
    )
    return next_state, ssm.extract(x_prior), y_pred


def single_step_loss(
    ssm: Ssm,
    x_prior: np.ndarray,
    gain: np.ndarray,
    delta_y: np.ndarray,
    y_next: np.ndarray
) -> float:
    """||y_{t+1} - Q Phi (x_prior + K delta_y)||^2, written as ||y_{t+1} - D A x_post||^2."""
    residual = np.asarray(y_next) - ssm.d @ (ssm.a @ (x_prior + gain @ delta_y))
    return float(np.vdot(residual, residual).real)


def epoch_objective(losses: Sequence[Sequence[float]], params: KpinParameters, beta: float) -> float:
    """
    Mean single-step loss over the batch plus beta * ||psi||_2.

    Args:
        losses: One list of step losses per selected subsequence (T_s for S1, T_s - 1 otherwise)
        params: Network parameters psi
        beta: Regularization factor
    """
    values = np.asarray(losses, dtype=float)
    if values.ndim != 2 or values.size == 0:
        raise DimensionError(f"Expected n_b x T_s losses, got shape {values.shape}")
    return float(values.mean() + beta * params.norm())


def segment(length: int, t_s: int) -> List[Tuple[int, int]]:
    """Disjoint consecutive [start, stop) windows of t_s slots; the residual tail is dropped."""
    if t_s < 1 or t_s > length:
        raise ConfigurationError(f"Subsequence length {t_s} invalid for {length} slots")
    n_s = length // t_s
    residual = length - n_s * t_s
    if residual:
        logger.warning(f"Discarding {residual} trailing slots that do not fill a subsequence")
    return [(b * t_s, (b + 1) * t_s) for b in range(n_s)]


def noisy_labels(labels: np.ndarray, level: Optional[float], rng: np.random.Generator) -> np.ndarray:
    """labels + level * rms(label) * n with n circular Gaussian, per label vector."""
    if not level:
        return labels
    rms = np.sqrt(np.mean(np.abs(labels) ** 2, axis=1, keepdims=True))
    return labels + level * rms * complex_gaussian(rng, labels.shape, 1.0)


def rollout_subsequence(
    ssm: Ssm,
    net: KpinNetwork,
    observations: np.ndarray,
    x_post: Optional[np.ndarray] = None
) -> HybridRollout:
    """
    Roll the hybrid filter over one subsequence from a fresh state.

    Step t filters observations[t]; x_prior[t] is the prediction made before it.
    """
    state = initial_hybrid_state(ssm, net, x_post)
    rollout = HybridRollout()
    for y_t in observations:
        x_prior = state.x_prior
        rollout.hidden.append(state.recurrent.h)
        delta_y = y_t - state.y_pred
        rollout.features.append(GainFeatures(delta_y=delta_y, delta_x=state.x_post_prev - state.x_prior_prev))
        state, _, _ = hybrid_ftp_step(ssm, net, state, y_t)
        rollout.x_prior.append(x_prior)
        rollout.x_post.append(state.x_post_prev)
        rollout.y_pred.append(ssm.d @ x_prior)
        rollout.gains.append(state.gain)
        rollout.tapes.append(state.tape)
    return rollout


def step_losses(
    ssm: Ssm,
    rollout: HybridRollout,
    observations: np.ndarray,
    strategy: str,
    labels: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Per-step loss of the chosen supervision head.

    S1 scores every filtered estimate, ||h_t - B^T x_{t|t}||^2 for t = 0..T_s-1. S2 and S3 score
    the one-step predictions made inside the subsequence, t = 1..T_s-1: S2 as
    ||h_t - B^T x_{t|t-1}||^2 and S3 as the single-step loss of the previous filter step.
    """
    if strategy == "S1":
        out = np.empty(rollout.length)
        for t in range(rollout.length):
            r = labels[t] - ssm.extract(rollout.x_post[t])
            out[t] = np.vdot(r, r).real
        return out

    if rollout.length < 2:
        raise ConfigurationError(f"Strategy {strategy} needs subsequences of at least 2 slots")
    out = np.empty(rollout.length - 1)
    for t in range(rollout.length - 1):
        if strategy == "S3":
            out[t] = single_step_loss(
                ssm, rollout.x_prior[t], rollout.gains[t], rollout.features[t].delta_y, observations[t + 1]
            )
        else:
            r = labels[t + 1] - ssm.extract(rollout.x_prior[t + 1])
            out[t] = np.vdot(r, r).real
    return out


def rollout_gradient(
    ssm: Ssm,
    net: KpinNetwork,
    rollout: HybridRollout,
    observations: np.ndarray,
    strategy: str,
    labels: Optional[np.ndarray],
    total: KpinParameters,
    scale: float
):
    """
    Add scale * d(sum of step losses)/d(psi) of one rollout into total.

    The S2 and S3 terms are indexed by the prediction they score, so step 0 carries none.

    Complex gradients follow g = dL/dRe + j dL/dIm.
    """
    a_h = ssm.a.conj().T
    d_h = ssm.d.conj().T
    b = ssm.b
    acc = BpttAccumulator(net, total)
    g_xprior_next = np.zeros(ssm.state_dim, dtype=np.complex128)
    g_dx = np.zeros(ssm.state_dim, dtype=np.complex128)

    for t in reversed(range(rollout.length)):
        x_prior, x_post = rollout.x_prior[t], rollout.x_post[t]
        delta_y = rollout.features[t].delta_y
        gain = rollout.gains[t]

        g_xpost = a_h @ g_xprior_next + g_dx
        g_xprior = -g_dx
        if strategy == "S1":
            g_xpost = g_xpost - 2.0 * scale * (b @ (labels[t] - ssm.extract(x_post)))
        elif strategy == "S2" and t > 0:
            g_xprior = g_xprior - 2.0 * scale * (b @ (labels[t] - ssm.extract(x_prior)))
        elif strategy == "S3" and t > 0:
            g_xprior = g_xprior - 2.0 * scale * (d_h @ delta_y)

        g_xprior = g_xprior + g_xpost
        g_gain = np.outer(g_xpost, delta_y.conj())
        feature_grads = acc.step(rollout.tapes[t], g_gain)
        g_delta_y = gain.conj().T @ g_xpost + feature_grads.delta_y
        g_xprior = g_xprior - d_h @ g_delta_y

        g_xprior_next = g_xprior
        g_dx = feature_grads.delta_x


class SubsequenceBatch:
    """Training signals cut into subsequences, with optional (noisy) labels."""

    def __init__(
        self,
        signals: SignalSequence,
        cfg: TrainConfig,
        labels: Optional[ChannelSequence] = None
    ):
        if cfg.strategy in ("S1", "S2") and labels is None:
            raise ConfigurationError(f"Strategy {cfg.strategy} requires channel labels")
        if cfg.strategy == "S3" and labels is not None:
            raise ConfigurationError("Strategy S3 trains on received signals only; labels must not be given")
        if cfg.strategy in ("S2", "S3") and cfg.t_s < 2:
            raise ConfigurationError(f"Strategy {cfg.strategy} needs t_s >= 2, got {cfg.t_s}")
        self.windows = segment(signals.length, cfg.t_s)
        if cfg.n_b > len(self.windows):
            raise ConfigurationError(f"n_b={cfg.n_b} exceeds the {len(self.windows)} available subsequences")
        self.observations = signals.observations
        self.strategy = cfg.strategy
        self.labels = None
        if labels is not None:
            if labels.length != signals.length:
                raise DimensionError(f"{labels.length} labels for {signals.length} observations")
            self.labels = noisy_labels(labels.vectors(), cfg.label_noise, np.random.default_rng([cfg.seed, 1]))

    @property
    def n_s(self) -> int:
        return len(self.windows)

    @property
    def terms_per_window(self) -> int:
        """Number of step losses one subsequence contributes."""
        t_s = self.windows[0][1] - self.windows[0][0]
        return t_s if self.strategy == "S1" else t_s - 1

    def window(self, index: int) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        start, stop = self.windows[index]
        labels = None if self.labels is None else self.labels[start:stop]
        return self.observations[start:stop], labels


def objective_and_gradient(
    ssm: Ssm,
    net: KpinNetwork,
    batch: SubsequenceBatch,
    indices: Sequence[int],
    beta: float
) -> Tuple[float, KpinParameters]:
    """
    Epoch objective over the selected subsequences and its gradient in psi.

    Gradients are accumulated in the given index order.
    """
    total = net.zero_parameters()
    losses = []
    scale = 1.0 / (len(indices) * batch.terms_per_window)
    for index in indices:
        observations, labels = batch.window(index)
        rollout = rollout_subsequence(ssm, net, observations)
        losses.append(step_losses(ssm, rollout, observations, batch.strategy, labels))
        rollout_gradient(ssm, net, rollout, observations, batch.strategy, labels, total, scale)

    value = epoch_objective(losses, net.params, beta)
    norm = net.params.norm()
    if beta and norm > 0:
        total.add_(net.params, beta / norm)
    return value, total


def train(
    signals: SignalSequence,
    ssm: Ssm,
    net: KpinNetwork,
    cfg: TrainConfig,
    labels: Optional[ChannelSequence] = None,
    on_epoch: Optional[EpochCallback] = None
) -> TrainResult:
    """
    Mini-batch training of the gain network on the training prefix.

    Each epoch draws n_b subsequence indices uniformly with replacement, rolls them out from
    x_{0|0} = 0 and a zero hidden state, and applies one Adam update on the batch gradient.

    Args:
        signals: Training signals
        ssm: Identified state-space model
        net: Initial network (not modified)
        cfg: Training configuration
        labels: Ground-truth channels of the training prefix (S1/S2 only)
        on_epoch: Called with (epoch, objective, net) after every update

    Returns:
        Trained network, per-epoch objective and wall time
    """
    batch = SubsequenceBatch(signals, cfg, labels)
    trained = net.with_parameters(net.params.copy())
    optimizer = Adam(trained.params, lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)

    logger.info(
        f"Training {cfg.strategy} on {batch.n_s} subsequences of {cfg.t_s} slots: "
        f"n_b={cfg.n_b}, n_e={cfg.n_e}, lr={cfg.lr}"
    )
    losses, epoch_ms = [], []
    for epoch in range(cfg.n_e):
        start = time.perf_counter()
        indices = rng.integers(0, batch.n_s, size=cfg.n_b)
        value, grads = objective_and_gradient(ssm, trained, batch, indices, cfg.beta)
        if not np.isfinite(value) or not np.all(np.isfinite(grads.flatten())):
            logger.error(f"Epoch {epoch + 1}/{cfg.n_e}: non-finite objective or gradient (objective {value:.4e}), stopping")
            raise NumericalError(f"Training diverged at epoch {epoch + 1} (objective {value})")
        optimizer.step(grads)
        epoch_ms.append((time.perf_counter() - start) * 1e3)
        losses.append(value)
        logger.debug(f"Epoch {epoch + 1}/{cfg.n_e}: objective={value:.6e}, {epoch_ms[-1]:.1f} ms")
        if on_epoch is not None:
            on_epoch(epoch, value, trained)

    if losses:
        logger.info(f"Training finished: objective {losses[0]:.4e} -> {losses[-1]:.4e}")
    return TrainResult(net=trained, losses=losses, epoch_ms=epoch_ms)


def kpin_predict(
    signals: SignalSequence,
    ssm: Ssm,
    net: KpinNetwork,
    horizon: int,
    warmup: int = 0,
    gains: Optional[Sequence[np.ndarray]] = None
) -> PredictionTrace:
    """
    Continuous rollout with frozen parameters over future signals.

    Record i holds h_{s+1|s} for s = warmup + i, aligned with arkf_predict.

    Args:
        signals: Received signals of the evaluation window
        ssm: State-space model
        net: Trained gain network
        horizon: Number of recorded predictions L
        warmup: Observations filtered before the first record
        gains: Gains injected in place of the network output, one per filtered observation

    Returns:
        Prediction trace with h_pred, y_pred, x_post and the gains used
    """
    if warmup + horizon > signals.length:
        raise DimensionError(f"warmup + horizon = {warmup + horizon} exceeds {signals.length} observations")
    if horizon == 0:
        return empty_trace(ssm.mn, ssm.obs_dim)

    total = warmup + horizon
    if gains is not None and len(gains) < total - 1:
        raise DimensionError(f"{len(gains)} injected gains for {total - 1} filter steps")

    state = initial_hybrid_state(ssm, net)
    h_pred, y_pred, x_post, used = [], [], [], []
    for s in range(total):
        if s >= warmup:
            h_pred.append(ssm.extract(state.x_prior))
            y_pred.append(state.y_pred)
            x_post.append(state.x_post_prev)
        if s < total - 1:
            override = None if gains is None else gains[s]
            state, _, _ = hybrid_ftp_step(ssm, net, state, signals.observations[s], override)
            used.append(state.gain)

    return PredictionTrace(
        h_pred=np.array(h_pred),
        y_pred=np.array(y_pred),
        x_post=np.array(x_post),
        filter_gains=used,
    )

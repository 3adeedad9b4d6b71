"""FC-GRU-FC gain network mapping innovation features to a complex gain matrix."""
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.special import expit

from app.exceptions import DimensionError
from app.numerics import unvec, vec

logger = logging.getLogger(__name__)

FEATURE_EPS = 1e-12
OUTPUT_INIT_SCALE = 1e-2

PARAM_ORDER = (
    "w_in", "b_in",
    "w_z", "u_z", "b_z",
    "w_r", "u_r", "b_r",
    "w_n", "u_n", "b_n",
    "w_out", "b_out",
)


class KpinParameters:
    """Real-valued tensors of the network in declared order. Also used for gradients."""

    def __init__(self, tensors: Dict[str, np.ndarray]):
        missing = [name for name in PARAM_ORDER if name not in tensors]
        if missing:
            raise DimensionError(f"Missing parameter tensors: {missing}")
        self.tensors = OrderedDict((name, np.asarray(tensors[name], dtype=np.float64)) for name in PARAM_ORDER)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def items(self):
        return self.tensors.items()

    def copy(self) -> "KpinParameters":
        return KpinParameters({name: t.copy() for name, t in self.items()})

    def zeros_like(self) -> "KpinParameters":
        return KpinParameters({name: np.zeros_like(t) for name, t in self.items()})

    def add_(self, other: "KpinParameters", scale: float = 1.0) -> "KpinParameters":
        for name, t in self.items():
            t += scale * other[name]
        return self

    def scale_(self, scale: float) -> "KpinParameters":
        for t in self.tensors.values():
            t *= scale
        return self

    def flatten(self) -> np.ndarray:
        return np.concatenate([t.ravel() for t in self.tensors.values()])

    def norm(self) -> float:
        return float(np.linalg.norm(self.flatten()))

    @property
    def size(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))


@dataclass(frozen=True)
class GainFeatures:
    """Innovation features: delta_y (tau*N) and delta_x (p*M*N), both complex."""
    delta_y: np.ndarray
    delta_x: np.ndarray


@dataclass(frozen=True)
class RecurrentState:
    """GRU hidden state; never rewritten when update_enabled is False."""
    h: np.ndarray
    update_enabled: bool = True


@dataclass(frozen=True)
class ForwardTape:
    """Activations cached by forward for the matching backward call."""
    x_in: np.ndarray
    a: np.ndarray
    h_prev: np.ndarray
    z: np.ndarray
    r: np.ndarray
    n: np.ndarray
    h_new: np.ndarray
    update_enabled: bool
    dims: Tuple[int, int, int] = field(default=(0, 0, 0))
    feature_norms: Tuple[float, float] = field(default=(0.0, 0.0))


class KpinNetwork:
    """Gain network g_psi: FC (tanh) -> GRU cell -> FC (linear)."""

    def __init__(
        self,
        state_dim: int,
        obs_dim: int,
        hidden_dim: Optional[int] = None,
        update_hidden: bool = True,
        seed: int = 0,
        params: Optional[KpinParameters] = None
    ):
        """
        Initialize the gain network.

        Args:
            state_dim: Latent state width pMN
            obs_dim: Observation width tau*N
            hidden_dim: GRU width (default 4 * input width)
            update_hidden: Propagate the hidden state between calls
            seed: Seed of the uniform(+-1/sqrt(fan_in)) initialisation; the output
                layer is drawn OUTPUT_INIT_SCALE times narrower with a zero bias, so the
                untrained filter runs close to open loop
            params: Explicit parameters (skips random initialisation)
        """
        self.state_dim = state_dim
        self.obs_dim = obs_dim
        self.in_dim = 2 * (obs_dim + state_dim)
        self.out_dim = 2 * state_dim * obs_dim
        self.hidden_dim = hidden_dim or 4 * self.in_dim
        self.update_hidden = update_hidden
        self.seed = seed
        self.params = params if params is not None else self._initialize(seed)
        self._check_shapes()

    def _shapes(self) -> Dict[str, Tuple[int, ...]]:
        i, h, o = self.in_dim, self.hidden_dim, self.out_dim
        shapes = {"w_in": (h, i), "b_in": (h,), "w_out": (o, h), "b_out": (o,)}
        for gate in ("z", "r", "n"):
            shapes[f"w_{gate}"] = (h, h)
            shapes[f"u_{gate}"] = (h, h)
            shapes[f"b_{gate}"] = (h,)
        return shapes

    def _initialize(self, seed: int) -> KpinParameters:
        rng = np.random.default_rng(seed)
        shapes = self._shapes()
        fan_in = {"w_in": self.in_dim, "b_in": self.in_dim, "w_out": self.hidden_dim, "b_out": self.hidden_dim}
        tensors = {}
        for name in PARAM_ORDER:
            bound = 1.0 / np.sqrt(fan_in.get(name, self.hidden_dim))
            tensors[name] = rng.uniform(-bound, bound, shapes[name])
        tensors["w_out"] *= OUTPUT_INIT_SCALE
        tensors["b_out"][:] = 0.0
        return KpinParameters(tensors)

    def _check_shapes(self):
        for name, shape in self._shapes().items():
            if self.params[name].shape != shape:
                raise DimensionError(f"Parameter {name} has shape {self.params[name].shape}, expected {shape}")
            if not np.all(np.isfinite(self.params[name])):
                raise DimensionError(f"Parameter {name} has non-finite entries")

    @property
    def num_parameters(self) -> int:
        return self.params.size

    def zero_parameters(self) -> KpinParameters:
        return self.params.zeros_like()

    def initial_state(self) -> RecurrentState:
        return RecurrentState(h=np.zeros(self.hidden_dim), update_enabled=self.update_hidden)

    def with_parameters(self, params: KpinParameters) -> "KpinNetwork":
        return KpinNetwork(
            self.state_dim, self.obs_dim, self.hidden_dim,
            update_hidden=self.update_hidden, seed=self.seed, params=params
        )

    def stack_features(self, feats: GainFeatures) -> Tuple[np.ndarray, Tuple[float, float]]:
        """
        Real-stack both features, each scaled to unit L2 norm.

        Returns:
            Tuple of (network input [dy.re, dy.im, dx.re, dx.im], raw norms of delta_y and delta_x)
        """
        dy = np.asarray(feats.delta_y)
        dx = np.asarray(feats.delta_x)
        if dy.shape != (self.obs_dim,) or dx.shape != (self.state_dim,):
            raise DimensionError(
                f"Feature shapes {dy.shape}, {dx.shape} do not match network dims "
                f"({self.obs_dim},), ({self.state_dim},)"
            )
        u_y, norm_y = l2_normalize(np.concatenate([dy.real, dy.imag]))
        u_x, norm_x = l2_normalize(np.concatenate([dx.real, dx.imag]))
        return np.concatenate([u_y, u_x]), (norm_y, norm_x)


def l2_normalize(v: np.ndarray, eps: float = FEATURE_EPS) -> Tuple[np.ndarray, float]:
    """v / max(||v||, eps) together with ||v||."""
    norm = float(np.linalg.norm(v))
    return v / max(norm, eps), norm


def l2_normalize_backward(u: np.ndarray, norm: float, grad_u: np.ndarray, eps: float = FEATURE_EPS) -> np.ndarray:
    """Pull dL/du back through u = v / max(||v||, eps)."""
    if norm > eps:
        return (grad_u - u * (u @ grad_u)) / norm
    return grad_u / eps


def forward(net: KpinNetwork, feats: GainFeatures, state: RecurrentState) -> Tuple[np.ndarray, RecurrentState, ForwardTape]:
    """
    Evaluate the gain network for one time step.

    Args:
        net: Gain network
        feats: Innovation features
        state: Incoming recurrent state

    Returns:
        Tuple of (gain matrix pMN x tauN, outgoing recurrent state, tape for backward)
    """
    p = net.params
    h = np.asarray(state.h, dtype=np.float64)
    if h.shape != (net.hidden_dim,):
        raise DimensionError(f"Hidden state has shape {h.shape}, expected ({net.hidden_dim},)")

    x_in, feature_norms = net.stack_features(feats)
    a = np.tanh(p["w_in"] @ x_in + p["b_in"])
    z = expit(p["w_z"] @ a + p["u_z"] @ h + p["b_z"])
    r = expit(p["w_r"] @ a + p["u_r"] @ h + p["b_r"])
    n = np.tanh(p["w_n"] @ a + p["u_n"] @ (r * h) + p["b_n"])
    h_new = (1.0 - z) * n + z * h
    out = p["w_out"] @ h_new + p["b_out"]

    half = net.out_dim // 2
    gain = unvec(out[:half] + 1j * out[half:], net.state_dim, net.obs_dim)
    next_state = RecurrentState(h=h_new if state.update_enabled else h, update_enabled=state.update_enabled)
    tape = ForwardTape(
        x_in=x_in, a=a, h_prev=h, z=z, r=r, n=n, h_new=h_new,
        update_enabled=state.update_enabled,
        dims=(net.in_dim, net.hidden_dim, net.out_dim),
        feature_norms=feature_norms,
    )
    return gain, next_state, tape


def backward(
    net: KpinNetwork,
    tape: ForwardTape,
    upstream_grad_on_gain: np.ndarray,
    hidden_grad: Optional[np.ndarray] = None
) -> Tuple[KpinParameters, GainFeatures, np.ndarray]:
    """
    Reverse-mode pass through FC-out, the GRU cell and FC-in.

    Complex gradients use the convention g = dL/dRe + j dL/dIm for a real scalar loss L.

    Args:
        net: Network used for the forward call
        tape: Tape of that forward call
        upstream_grad_on_gain: dL/dK as a complex pMN x tauN matrix
        hidden_grad: dL/dh_new flowing back from later time steps

    Returns:
        Tuple of (parameter gradients, complex feature gradients, gradient on the incoming hidden state)
    """
    if tape.dims != (net.in_dim, net.hidden_dim, net.out_dim):
        raise DimensionError(f"Tape dims {tape.dims} do not match network")
    g = np.asarray(upstream_grad_on_gain, dtype=np.complex128)
    if g.shape != (net.state_dim, net.obs_dim):
        raise DimensionError(f"Gain gradient has shape {g.shape}, expected ({net.state_dim}, {net.obs_dim})")

    p = net.params
    g_vec = vec(g)
    d_out = np.concatenate([g_vec.real, g_vec.imag])

    grads = {
        "w_out": np.outer(d_out, tape.h_new),
        "b_out": d_out,
    }
    dh_new = p["w_out"].T @ d_out
    if hidden_grad is not None:
        dh_new = dh_new + hidden_grad

    h, z, r, n, a = tape.h_prev, tape.z, tape.r, tape.n, tape.a

    dn = dh_new * (1.0 - z)
    dz = dh_new * (h - n)
    dh_prev = dh_new * z

    dn_pre = dn * (1.0 - n ** 2)
    rh = r * h
    grads["w_n"] = np.outer(dn_pre, a)
    grads["u_n"] = np.outer(dn_pre, rh)
    grads["b_n"] = dn_pre
    d_rh = p["u_n"].T @ dn_pre
    dr = d_rh * h
    dh_prev += d_rh * r
    da = p["w_n"].T @ dn_pre

    dz_pre = dz * z * (1.0 - z)
    grads["w_z"] = np.outer(dz_pre, a)
    grads["u_z"] = np.outer(dz_pre, h)
    grads["b_z"] = dz_pre
    da += p["w_z"].T @ dz_pre
    dh_prev += p["u_z"].T @ dz_pre

    dr_pre = dr * r * (1.0 - r)
    grads["w_r"] = np.outer(dr_pre, a)
    grads["u_r"] = np.outer(dr_pre, h)
    grads["b_r"] = dr_pre
    da += p["w_r"].T @ dr_pre
    dh_prev += p["u_r"].T @ dr_pre

    da_pre = da * (1.0 - a ** 2)
    grads["w_in"] = np.outer(da_pre, tape.x_in)
    grads["b_in"] = da_pre
    dx_in = p["w_in"].T @ da_pre

    ny, nx = net.obs_dim, net.state_dim
    norm_y, norm_x = tape.feature_norms
    dy_raw = l2_normalize_backward(tape.x_in[:2 * ny], norm_y, dx_in[:2 * ny])
    dx_raw = l2_normalize_backward(tape.x_in[2 * ny:], norm_x, dx_in[2 * ny:])
    feature_grads = GainFeatures(
        delta_y=dy_raw[:ny] + 1j * dy_raw[ny:],
        delta_x=dx_raw[:nx] + 1j * dx_raw[nx:],
    )
    return KpinParameters(grads), feature_grads, dh_prev


class BpttAccumulator:
    """
    Backpropagation through time over one subsequence.

    Steps must be fed in reverse time order. The hidden-state gradient is chained between
    steps only while the hidden state is being updated.
    """

    def __init__(self, net: KpinNetwork, total: Optional[KpinParameters] = None):
        self.net = net
        self.total = total if total is not None else net.zero_parameters()
        self._carry: Optional[np.ndarray] = None

    def step(self, tape: ForwardTape, gain_grad: np.ndarray) -> GainFeatures:
        """Accumulate one step and return its complex feature gradients."""
        carry = self._carry if tape.update_enabled else None
        grads, feature_grads, dh_prev = backward(self.net, tape, gain_grad, carry)
        self.total.add_(grads)
        self._carry = dh_prev if tape.update_enabled else None
        return feature_grads

    @property
    def hidden_grad(self) -> Optional[np.ndarray]:
        """Gradient on the hidden state entering the earliest step processed so far."""
        return self._carry


def bptt_accumulate(
    net: KpinNetwork,
    tapes: Sequence[ForwardTape],
    gain_grads: Sequence[np.ndarray]
) -> Tuple[KpinParameters, List[GainFeatures]]:
    """
    Total parameter gradient of a loss whose gain gradients are known per step.

    Args:
        net: Gain network
        tapes: Forward tapes in time order
        gain_grads: dL/dK_t in time order

    Returns:
        Tuple of (summed parameter gradients, per-step feature gradients in time order)
    """
    if len(tapes) != len(gain_grads):
        raise DimensionError(f"{len(tapes)} tapes but {len(gain_grads)} gain gradients")
    acc = BpttAccumulator(net)
    feature_grads: List[GainFeatures] = []
    for tape, grad in zip(reversed(tapes), reversed(gain_grads)):
        feature_grads.append(acc.step(tape, grad))
    feature_grads.reverse()
    return acc.total, feature_grads

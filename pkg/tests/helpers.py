"""Small scenario builders shared by the test modules."""
from typing import Optional, Tuple

import numpy as np

from app.ar_ssm.ssm import Ssm, build_ssm
from app.ar_ssm.yule_walker import ArModel
from app.channel.generators import ChannelSequence, generate_ar_oracle
from app.models.schemas import PilotConfig, ScenarioConfig
from app.signal.observation import SignalSequence, observe
from app.signal.pilot import make_pilot, transform_pilot


def ar_model(phi: np.ndarray, noise_var: float, p: int = 1) -> ArModel:
    mn = phi.shape[0]
    return ArModel(p=p, phi=np.asarray(phi, dtype=np.complex128), sigma_u=noise_var * np.eye(mn), epsilon=0.0)


def make_ssm(
    n_rx: int = 2,
    n_tx: int = 1,
    phi: Optional[np.ndarray] = None,
    p: int = 1,
    noise_var: float = 0.19,
    sigma_v: float = 0.1,
    rho: float = 1.0
) -> Ssm:
    """SSM of a known AR(p) model observed through the default pilot."""
    mn = n_rx * n_tx
    if phi is None:
        phi = np.hstack([0.9 / p * np.eye(mn)] * p)
    q = transform_pilot(make_pilot(PilotConfig(n_tx=n_tx, tau=n_tx)), rho, n_rx)
    return build_ssm(ar_model(phi, noise_var, p), q, sigma_v)


def simulate(ssm: Ssm, length: int, seed: int, sigma_v: Optional[float] = None) -> Tuple[ChannelSequence, SignalSequence]:
    """Channels drawn from the SSM's own AR model and their noisy observations."""
    n_rx = ssm.q.n_rx
    n_tx = ssm.mn // n_rx
    channels = generate_ar_oracle(ssm.phi, ssm.sigma_u, n_rx, n_tx, ssm.p, length, seed)
    noise = ssm.sigma_v if sigma_v is None else sigma_v
    return channels, observe(channels, ssm.q, noise, seed + 1)


def tiny_config(**overrides) -> ScenarioConfig:
    """Desk-sized scenario that runs every method in well under a second per seed."""
    values = dict(
        n_rx=2, n_tx=1, tau=1, p=1,
        train_length=60, horizon=10, t_s=5, n_b=2, n_e=2,
        hidden_dim=6, n_paths=8, seeds=[0],
    )
    values.update(overrides)
    return ScenarioConfig(**values)

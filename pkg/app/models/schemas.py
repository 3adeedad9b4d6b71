"""Configuration and report schemas for channel prediction experiments."""
from pydantic import BaseModel, Field, model_validator
from typing import Optional, Dict, Any, List, Literal
import hashlib
import json

import yaml

Strategy = Literal["S1", "S2", "S3"]
ChannelKind = Literal["surrogate", "ar_oracle"]
MethodName = Literal["AR", "ARKF", "KPIN", "KPIN_MLP", "S1", "S2"]

SPEED_OF_LIGHT = 2.998e8


class DynamicCondition(BaseModel):
    """Mobility and aging condition of a scenario."""
    v: float = Field(gt=0, description="UE speed in km/h")
    f: float = Field(gt=0, description="Carrier frequency in GHz")
    k: float = Field(default=1.0, gt=0, description="Slot duration in coherence times")

    @property
    def coherence_time_ms(self) -> float:
        return 540.0 / (self.v * self.f)

    @property
    def slot_ms(self) -> float:
        return self.k * self.coherence_time_ms

    @property
    def doppler_hz(self) -> float:
        """Maximum Doppler shift (v/3.6) * f / c."""
        return (self.v / 3.6) * (self.f * 1e9) / SPEED_OF_LIGHT


class SurrogateChannelParams(BaseModel):
    """Multipath profile of the sum-of-sinusoids channel surrogate."""
    n_paths: int = Field(default=12, ge=1, description="Number of multipath components")
    power_decay: float = Field(default=0.3, ge=0, description="Exponential per-path power decay exponent")
    angle_seed: int = Field(default=0, description="Seed for per-path angles")
    phase_seed: int = Field(default=1, description="Seed for per-path phases")
    rician_k_db: float = Field(default=0.0, description="LoS-to-NLoS power ratio in dB (0 disables LoS emphasis)")


class PilotConfig(BaseModel):
    """Pilot transmission parameters."""
    n_tx: int = Field(ge=1, description="Number of UE antennas M")
    tau: int = Field(ge=1, description="Pilot length")
    rho: float = Field(default=1.0, gt=0, description="Transmit-power scale")
    sigma_v: float = Field(default=1.0, gt=0, description="Noise standard deviation")

    @model_validator(mode="after")
    def _check_length(self) -> "PilotConfig":
        if self.tau < self.n_tx:
            raise ValueError(f"Pilot length tau={self.tau} is shorter than n_tx={self.n_tx}")
        return self


class TrainConfig(BaseModel):
    """Hyperparameters of unsupervised (or supervised-ablation) KPIN training."""
    t_s: int = Field(default=10, ge=1, description="Subsequence length")
    n_b: int = Field(default=10, ge=1, description="Subsequences per epoch")
    n_e: int = Field(default=50, ge=0, description="Number of epochs")
    lr: float = Field(default=1e-3, ge=0, description="Adam learning rate")
    beta: float = Field(default=1e-5, ge=0, description="Weight of the parameter-norm regularizer")
    strategy: Strategy = Field(default="S3", description="Supervision strategy")
    label_noise: Optional[float] = Field(default=None, ge=0, description="Relative label error level for S1/S2")
    seed: int = Field(default=0, description="Seed for subsequence sampling and label noise")


class ScenarioConfig(BaseModel):
    """Every physical, identification, training and evaluation parameter of a scenario."""
    # Antennas and pilots
    n_rx: int = Field(default=4, ge=1, description="BS antennas N")
    n_tx: int = Field(default=2, ge=1, description="UE antennas M")
    tau: int = Field(default=2, ge=1, description="Pilot length")
    sigma_v: float = Field(default=1.0, gt=0, description="Noise standard deviation")
    snr_db: float = Field(default=20.0, description="Target SNR in dB")

    # Dynamics
    v: float = Field(default=60.0, gt=0, description="UE speed in km/h")
    f: float = Field(default=28.0, gt=0, description="Carrier frequency in GHz")
    k: float = Field(default=1.0, gt=0, description="Aging factor: slot duration in coherence times")
    channel_kind: ChannelKind = Field(default="surrogate", description="Ground-truth channel generator")
    n_paths: int = Field(default=12, ge=1, description="Surrogate multipath components")
    power_decay: float = Field(default=0.3, ge=0, description="Surrogate power decay exponent")
    rician_k_db: float = Field(default=0.0, description="Surrogate LoS-to-NLoS ratio in dB")
    oracle_coefficients: List[float] = Field(default_factory=lambda: [0.9], description="Per-lag scalar AR coefficients of the oracle channel")
    oracle_noise_var: float = Field(default=0.19, ge=0, description="Per-entry innovation variance of the oracle channel")

    # Identification
    p: int = Field(default=2, ge=1, description="AR order")
    epsilon: Optional[float] = Field(default=None, ge=0, description="Yule-Walker perturbation (None = scaled default)")

    # Training and evaluation
    train_length: int = Field(default=400, ge=2, description="Training length T")
    horizon: int = Field(default=50, ge=1, description="Evaluation horizon L")
    test_warmup: Optional[int] = Field(default=None, ge=0, description="Observations consumed before the horizon (None = t_s)")
    t_s: int = Field(default=10, ge=1, description="Subsequence length")
    n_b: int = Field(default=10, ge=1, description="Batch size")
    n_e: int = Field(default=50, ge=0, description="Epochs")
    lr: float = Field(default=1e-3, ge=0, description="Learning rate")
    beta: float = Field(default=1e-5, ge=0, description="Regularization factor")
    hidden_dim: Optional[int] = Field(default=None, ge=1, description="GRU width (None = 4 * input width)")
    gru_update: bool = Field(default=True, description="Propagate the GRU hidden state over time")
    strategy: Strategy = Field(default="S3", description="Supervision strategy of the KPIN method")
    label_noise: Optional[float] = Field(default=None, ge=0, description="Label error level for S1/S2")
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4], description="Monte Carlo seeds")

    @model_validator(mode="after")
    def _check_constraints(self) -> "ScenarioConfig":
        if self.tau < self.n_tx:
            raise ValueError(f"tau={self.tau} must be >= n_tx={self.n_tx}")
        if self.p >= self.train_length:
            raise ValueError(f"AR order p={self.p} must be below train_length={self.train_length}")
        if self.t_s > self.train_length:
            raise ValueError(f"t_s={self.t_s} exceeds train_length={self.train_length}")
        n_s = self.train_length // self.t_s
        if self.n_b > n_s:
            raise ValueError(f"n_b={self.n_b} exceeds the {n_s} available subsequences")
        if self.warmup > self.train_length:
            raise ValueError(f"test_warmup={self.warmup} exceeds train_length={self.train_length}")
        if not self.seeds:
            raise ValueError("At least one seed is required")
        return self

    @property
    def warmup(self) -> int:
        return self.t_s if self.test_warmup is None else self.test_warmup

    @property
    def total_length(self) -> int:
        return self.train_length + self.horizon

    def dynamic_condition(self) -> DynamicCondition:
        return DynamicCondition(v=self.v, f=self.f, k=self.k)

    def surrogate_params(self, seed: int) -> SurrogateChannelParams:
        return SurrogateChannelParams(
            n_paths=self.n_paths,
            power_decay=self.power_decay,
            angle_seed=seed,
            phase_seed=seed + 10_000,
            rician_k_db=self.rician_k_db,
        )

    def train_config(self, seed: int, strategy: Optional[Strategy] = None) -> TrainConfig:
        return TrainConfig(
            t_s=self.t_s,
            n_b=self.n_b,
            n_e=self.n_e,
            lr=self.lr,
            beta=self.beta,
            strategy=strategy or self.strategy,
            label_noise=self.label_noise,
            seed=seed,
        )

    def config_hash(self) -> str:
        """First 12 hex chars of the SHA-256 of the canonical JSON dump."""
        canonical = json.dumps(self.model_dump(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    @classmethod
    def from_yaml(cls, path: str, **overrides: Any) -> "ScenarioConfig":
        """
        Load a scenario file, flattening its sections.

        Args:
            path: YAML file with top-level sections of key/value pairs
            **overrides: Values that take precedence over the file

        Returns:
            Validated scenario configuration
        """
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        flat: Dict[str, Any] = {}
        for key, value in raw.items():
            if isinstance(value, dict):
                flat.update(value)
            else:
                flat[key] = value
        flat.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**flat)


class EvalReport(BaseModel):
    """Evaluation of one method on one seed."""
    method: str = Field(description="Prediction method")
    seed: int = Field(description="Monte Carlo seed")
    nse_per_step_db: List[float] = Field(default_factory=list, description="Per-step NSE in dB")
    nmse_linear: float = Field(description="Mean of linear NSEs over the horizon")
    nmse_db: float = Field(description="10*log10 of nmse_linear")
    rate_bits_per_s_per_hz: float = Field(description="Mean achievable rate over the horizon")
    epoch_ms: Optional[float] = Field(default=None, description="Mean wall time per training epoch")
    config_hash: str = Field(description="Hash of the resolved scenario config")
    config: Dict[str, Any] = Field(default_factory=dict, description="Resolved scenario config echo")

    def to_row(self) -> Dict[str, Any]:
        """Flat CSV row without the per-step profile and config echo."""
        return {
            "method": self.method,
            "seed": self.seed,
            "nmse_db": self.nmse_db,
            "nmse_linear": self.nmse_linear,
            "rate": self.rate_bits_per_s_per_hz,
            "epoch_ms": self.epoch_ms,
            "config_hash": self.config_hash,
        }

"""Base predictor interface for all channel prediction methods."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional
import logging

from app.ar_ssm.ssm import Ssm
from app.ar_ssm.yule_walker import ArModel, AutocovarianceSet
from app.channel.generators import ChannelSequence
from app.exceptions import NumericalError
from app.metrics.evaluation import horizon_rate, nmse, to_db
from app.models.schemas import EvalReport, ScenarioConfig
from app.predictors.trace import PredictionTrace
from app.signal.observation import SignalSequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvaluationWindow:
    """
    One seed of a scenario: the full channel and signal sequences, the model identified
    from the training prefix, and the train/test split.

    Slots [0, T) are training data; predictions are scored on slots [T, T + L).
    """
    config: ScenarioConfig
    seed: int
    channels: ChannelSequence
    signals: SignalSequence
    ar: ArModel
    autocov: AutocovarianceSet
    ssm: Ssm

    @property
    def train_length(self) -> int:
        return self.config.train_length

    @property
    def horizon(self) -> int:
        return self.config.horizon

    @property
    def warmup(self) -> int:
        return self.config.warmup

    def train_signals(self) -> SignalSequence:
        return self.signals.slice(0, self.train_length)

    def train_channels(self) -> ChannelSequence:
        return self.channels.slice(0, self.train_length)

    def test_signals(self) -> SignalSequence:
        """Observations from T - warmup up to the end of the horizon."""
        return self.signals.slice(self.train_length - self.warmup, self.train_length + self.horizon)

    def test_channels(self) -> ChannelSequence:
        return self.channels.slice(self.train_length, self.train_length + self.horizon)


class BasePredictor(ABC):
    """Abstract base class for all predictors."""

    def __init__(self, name: str, description: str):
        """
        Initialize the base predictor.

        Args:
            name: Method name used in reports
            description: What the method does
        """
        self.name = name
        self.description = description
        self.epoch_ms: Optional[float] = None

    def fit(self, window: EvaluationWindow):
        """
        Learn whatever the method needs from the training prefix.

        Args:
            window: Evaluation window of one seed
        """
        return None

    @abstractmethod
    def predict(self, window: EvaluationWindow) -> PredictionTrace:
        """
        Predict the channel at every slot of the horizon.

        Args:
            window: Evaluation window of one seed

        Returns:
            Trace whose record i predicts slot T + i
        """
        pass

    def evaluate(self, window: EvaluationWindow) -> EvalReport:
        """
        Fit, predict and score against the test-horizon ground truth.

        Returns:
            Report with per-step NSE, NMSE and the mean achievable rate
        """
        self.fit(window)
        truth = window.test_channels()
        trace = self.predict(window).with_ground_truth(truth.vectors())
        nmse_linear = nmse(trace.nse)

        predicted = ChannelSequence.from_vectors(trace.h_pred, truth.n_rx, truth.n_tx, truth.slot_ms)
        try:
            rate = horizon_rate(predicted.frames, window.signals.rho, window.config.sigma_v)
        except NumericalError as e:
            logger.warning(f"{self.name} seed {window.seed}: rate undefined ({e})")
            rate = float("nan")

        logger.info(f"{self.name} seed {window.seed}: NMSE {to_db(nmse_linear):.2f} dB")
        return EvalReport(
            method=self.name,
            seed=window.seed,
            nse_per_step_db=[float(v) for v in to_db(trace.nse)],
            nmse_linear=nmse_linear,
            nmse_db=float(to_db(nmse_linear)),
            rate_bits_per_s_per_hz=rate,
            epoch_ms=self.epoch_ms,
            config_hash=window.config.config_hash(),
            config=window.config.model_dump(),
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


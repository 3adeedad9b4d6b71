"""KPIN predictors: learned-gain hybrid filtering under each supervision strategy."""
from typing import Optional
import logging

from app.exceptions import ConfigurationError
from app.kpin.network import KpinNetwork
from app.kpin.training import TrainResult, kpin_predict, train
from app.models.schemas import Strategy
from app.predictors.ar_predictor import ArPredictor
from app.predictors.base_predictor import BasePredictor, EvaluationWindow
from app.predictors.kalman import ArkfPredictor
from app.predictors.trace import PredictionTrace

logger = logging.getLogger(__name__)


class KpinPredictor(BasePredictor):
    """Hybrid filter-then-predict whose gain comes from a trained FC-GRU-FC network."""

    def __init__(
        self,
        name: str = "KPIN",
        strategy: Strategy = "S3",
        update_hidden: Optional[bool] = None
    ):
        """
        Initialize the predictor.

        Args:
            name: Method name used in reports
            strategy: Supervision strategy used for training
            update_hidden: Force the hidden-state update on or off (None = scenario setting)
        """
        super().__init__(name=name, description=f"KPIN trained with strategy {strategy}")
        self.strategy = strategy
        self.update_hidden = update_hidden
        self.result: Optional[TrainResult] = None

    def build_network(self, window: EvaluationWindow) -> KpinNetwork:
        cfg = window.config
        update = cfg.gru_update if self.update_hidden is None else self.update_hidden
        return KpinNetwork(
            state_dim=window.ssm.state_dim,
            obs_dim=window.ssm.obs_dim,
            hidden_dim=cfg.hidden_dim,
            update_hidden=update,
            seed=window.seed,
        )

    def fit(self, window: EvaluationWindow):
        net = self.build_network(window)
        train_cfg = window.config.train_config(window.seed, self.strategy)
        labels = None if self.strategy == "S3" else window.train_channels()
        self.result = train(window.train_signals(), window.ssm, net, train_cfg, labels)
        self.epoch_ms = self.result.mean_epoch_ms
        logger.info(
            f"{self.name} seed {window.seed}: {net.num_parameters} parameters, "
            f"{len(self.result.losses)} epochs"
        )

    def predict(self, window: EvaluationWindow) -> PredictionTrace:
        if self.result is None:
            self.fit(window)
        return kpin_predict(window.test_signals(), window.ssm, self.result.net, window.horizon, window.warmup)


def create_predictor(method: str) -> BasePredictor:
    """Predictor for a method name: AR, ARKF, KPIN, KPIN_MLP, S1 or S2."""
    if method == "AR":
        return ArPredictor()
    if method == "ARKF":
        return ArkfPredictor()
    if method == "KPIN":
        return KpinPredictor("KPIN", "S3")
    if method == "KPIN_MLP":
        return KpinPredictor("KPIN_MLP", "S3", update_hidden=False)
    if method in ("S1", "S2"):
        return KpinPredictor(method, method)
    raise ConfigurationError(f"Unknown method: {method}")

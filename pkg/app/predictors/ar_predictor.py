"""Pure AR extrapolation from true channel contexts."""
from typing import Optional

import numpy as np

from app.ar_ssm.yule_walker import ArModel
from app.channel.generators import ChannelSequence
from app.exceptions import DimensionError
from app.predictors.base_predictor import BasePredictor, EvaluationWindow
from app.predictors.trace import PredictionTrace, empty_trace


def ar_predict(
    true_channels: ChannelSequence,
    ar: ArModel,
    horizon: int,
    start: Optional[int] = None
) -> PredictionTrace:
    """
    h_hat_{t+1} = sum_j Phi_j h_{t+1-j} using ground-truth contexts.

    Record i predicts the channel at index start + i and carries its NSE.

    Args:
        true_channels: Ground-truth channel sequence
        ar: AR model
        horizon: Number of predictions L
        start: Index of the first predicted slot (defaults to p)

    Returns:
        Prediction trace with NSE attached
    """
    start = ar.p if start is None else start
    if start < ar.p:
        raise DimensionError(f"AR({ar.p}) needs {ar.p} context slots before index {start}")
    if start + horizon > true_channels.length:
        raise DimensionError(f"start + horizon = {start + horizon} exceeds {true_channels.length} slots")
    if horizon == 0:
        return empty_trace(ar.dim)

    h = true_channels.vectors()
    preds = np.empty((horizon, ar.dim), dtype=np.complex128)
    for i in range(horizon):
        t = start + i
        context = h[t - ar.p:t][::-1].reshape(-1)
        preds[i] = ar.phi @ context
    trace = PredictionTrace(h_pred=preds)
    return trace.with_ground_truth(h[start:start + horizon])


class ArPredictor(BasePredictor):
    """AR(p) extrapolation that reads the true channels preceding each predicted slot."""

    def __init__(self):
        super().__init__(name="AR", description="Yule-Walker AR(p) prediction from true CSI contexts")

    def predict(self, window: EvaluationWindow) -> PredictionTrace:
        return ar_predict(window.channels, window.ar, window.horizon, start=window.train_length)

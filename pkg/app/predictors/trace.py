"""Per-step prediction records shared by every predictor."""
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
import pandas as pd

from app.exceptions import DimensionError
from app.metrics.evaluation import nse, to_db


@dataclass(frozen=True)
class PredictionTrace:
    """
    One record per evaluated step: h_pred[i] is the one-step prediction of the channel at
    step i of the evaluation window.
    """
    h_pred: np.ndarray
    y_pred: Optional[np.ndarray] = None
    x_post: Optional[np.ndarray] = None
    nse: Optional[np.ndarray] = None
    filter_gains: List[np.ndarray] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return self.h_pred.shape[0]

    def with_ground_truth(self, h_true: np.ndarray) -> "PredictionTrace":
        """Attach per-step NSE against true channel vectors of shape (L, MN)."""
        h_true = np.asarray(h_true)
        if h_true.shape != self.h_pred.shape:
            raise DimensionError(f"Ground truth shape {h_true.shape} != prediction shape {self.h_pred.shape}")
        errors = np.array([nse(h, h_hat) for h, h_hat in zip(h_true, self.h_pred)])
        return replace(self, nse=errors)

    def to_frame(self, include_entries: bool = False) -> pd.DataFrame:
        """CSV-ready table with columns t, nse_db and optionally the predicted entries."""
        frame = pd.DataFrame({"t": np.arange(self.horizon)})
        frame["nse_db"] = to_db(self.nse) if self.nse is not None else np.nan
        if include_entries:
            for j in range(self.h_pred.shape[1]):
                frame[f"h{j}_re"] = self.h_pred[:, j].real
                frame[f"h{j}_im"] = self.h_pred[:, j].imag
        return frame


def empty_trace(mn: int, obs_dim: Optional[int] = None) -> PredictionTrace:
    return PredictionTrace(
        h_pred=np.zeros((0, mn), dtype=np.complex128),
        y_pred=None if obs_dim is None else np.zeros((0, obs_dim), dtype=np.complex128),
        nse=np.zeros(0),
    )

"""Seed aggregation of evaluation reports and the epoch-time scaling fit."""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

from app.exceptions import ChannelPredictionError
from app.models.schemas import EvalReport


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def summarize(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """
    Per-method aggregate over seeds.

    NMSE statistics are taken over the per-seed dB values, each computed from the
    linear mean NSE of its seed.
    """
    columns = ["method", "n_seeds", "nmse_db_median", "nmse_db_mean", "nmse_db_std", "rate_mean", "epoch_ms_mean"]
    if not reports:
        return pd.DataFrame(columns=columns)
    frame = pd.DataFrame([r.to_row() for r in reports])
    grouped = frame.groupby("method", sort=False)
    summary = pd.DataFrame({
        "n_seeds": grouped["seed"].count(),
        "nmse_db_median": grouped["nmse_db"].median(),
        "nmse_db_mean": grouped["nmse_db"].mean(),
        "nmse_db_std": grouped["nmse_db"].std(ddof=0),
        "rate_mean": grouped["rate"].mean(),
        "epoch_ms_mean": grouped["epoch_ms"].mean(),
    }).reset_index()
    return summary[columns]


def nse_profile(reports: Sequence[EvalReport], method: str) -> pd.DataFrame:
    """Per-step mean and std of NSE (dB) across the seeds of one method."""
    rows = [r.nse_per_step_db for r in reports if r.method == method]
    if not rows:
        raise ChannelPredictionError(f"No reports for method {method}")
    stacked = np.asarray(rows, dtype=float)
    return pd.DataFrame({
        "t": np.arange(stacked.shape[1]),
        "nse_db_mean": stacked.mean(axis=0),
        "nse_db_std": stacked.std(axis=0),
    })


def fit_linear_law(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    """Least-squares line through (x, y) with its coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise ChannelPredictionError(f"Need at least two paired points, got {x.size} and {y.size}")
    result = stats.linregress(x, y)
    return LinearFit(slope=float(result.slope), intercept=float(result.intercept), r_squared=float(result.rvalue ** 2))

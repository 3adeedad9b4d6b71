"""Metrics package initialization."""
from app.metrics.evaluation import (
    to_db,
    nse,
    nmse,
    nmse_at_horizons,
    zf_precoder,
    achievable_rate,
    horizon_rate,
)
from app.metrics.aggregation import LinearFit, summarize, nse_profile, fit_linear_law

__all__ = [
    'to_db',
    'nse',
    'nmse',
    'nmse_at_horizons',
    'zf_precoder',
    'achievable_rate',
    'horizon_rate',
    'LinearFit',
    'summarize',
    'nse_profile',
    'fit_linear_law',
]

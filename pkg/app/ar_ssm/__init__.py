"""AR identification and state-space model package initialization."""
from app.ar_ssm.yule_walker import (
    AutocovarianceSet,
    ArModel,
    empirical_signal_autocov,
    channel_autocov_from_signals,
    estimate_autocovariances,
    fit_ar,
)
from app.ar_ssm.ssm import Ssm, build_ssm, identify_ssm, initial_posterior_covariance

__all__ = [
    'AutocovarianceSet',
    'ArModel',
    'empirical_signal_autocov',
    'channel_autocov_from_signals',
    'estimate_autocovariances',
    'fit_ar',
    'Ssm',
    'build_ssm',
    'identify_ssm',
    'initial_posterior_covariance',
]

"""Exception hierarchy for the channel prediction toolkit."""


class ChannelPredictionError(ValueError):
    """Root of all errors raised by the toolkit."""


class DimensionError(ChannelPredictionError):
    """Array shapes do not conform."""


class NumericalError(ChannelPredictionError):
    """Singular or ill-conditioned system, or a decomposition that did not converge."""


class UnstableModelError(ChannelPredictionError):
    """AR dynamics whose companion matrix is not Schur-stable."""


class ConfigurationError(ChannelPredictionError):
    """Configuration values that violate a cross-field constraint."""


class ArtifactError(ChannelPredictionError):
    """Stored artifact that is missing, corrupt or of an unsupported version."""

"""Channel package initialization."""
from app.channel.generators import (
    ChannelSequence,
    coherence_time,
    generate_surrogate,
    generate_ar_oracle,
)

__all__ = ['ChannelSequence', 'coherence_time', 'generate_surrogate', 'generate_ar_oracle']

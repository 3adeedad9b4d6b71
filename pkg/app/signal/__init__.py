"""Signal package initialization."""
from app.signal.pilot import TransformedPilot, make_pilot, transform_pilot, rho_for_snr
from app.signal.observation import SignalSequence, observe, measured_snr_db

__all__ = [
    'TransformedPilot',
    'make_pilot',
    'transform_pilot',
    'rho_for_snr',
    'SignalSequence',
    'observe',
    'measured_snr_db',
]

"""Numerics package initialization."""
from app.numerics.linalg import (
    kron,
    pinv,
    solve_hermitian,
    vec,
    unvec,
    hermitize,
    psd_clip,
    spectral_radius,
    complex_gaussian,
    covariance_factor,
    block_companion,
)

__all__ = [
    'kron',
    'pinv',
    'solve_hermitian',
    'vec',
    'unvec',
    'hermitize',
    'psd_clip',
    'spectral_radius',
    'complex_gaussian',
    'covariance_factor',
    'block_companion',
]

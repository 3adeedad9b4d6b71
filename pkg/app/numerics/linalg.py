"""Dense complex linear-algebra kernels shared by every other package."""
from typing import Union
import logging

import numpy as np
import scipy.linalg as linalg

from app.exceptions import DimensionError, NumericalError

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray
ComplexVector = np.ndarray

PINV_RCOND = 1e-12
HERMITIAN_TOL = 1e-9
MAX_CONDITION = 1e14


def as_complex_matrix(m: Union[np.ndarray, list]) -> ComplexMatrix:
    """Coerce input to a finite 2-D complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"Expected a matrix, got array with shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError("Matrix has non-finite entries")
    return arr


def hermitize(m: ComplexMatrix) -> ComplexMatrix:
    """Return (M + M^H) / 2."""
    return 0.5 * (m + m.conj().T)


def psd_clip(m: ComplexMatrix) -> ComplexMatrix:
    """Project a Hermitian matrix onto the PSD cone by clipping negative eigenvalues."""
    eigvals, eigvecs = linalg.eigh(hermitize(m))
    if eigvals.min(initial=0.0) < 0:
        logger.debug(f"Clipping {np.sum(eigvals < 0)} negative eigenvalues (min={eigvals.min():.3e})")
    clipped = np.clip(eigvals, 0.0, None)
    return hermitize((eigvecs * clipped) @ eigvecs.conj().T)


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """
    Kronecker product of two complex matrices.

    Args:
        a: Left factor (p x q)
        b: Right factor (r x s)

    Returns:
        Block matrix of shape (p*r, q*s) with block (i, j) equal to a[i, j] * b
    """
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def pinv(m: ComplexMatrix) -> ComplexMatrix:
    """
    Moore-Penrose pseudo-inverse via SVD.

    Singular values below PINV_RCOND * sigma_max are truncated.

    Args:
        m: Nonzero complex matrix

    Returns:
        Pseudo-inverse with the transposed shape of m
    """
    arr = as_complex_matrix(m)
    if not np.any(arr):
        raise NumericalError("Pseudo-inverse of an all-zero matrix is not supported")
    try:
        return linalg.pinv(arr, atol=0.0, rtol=PINV_RCOND)
    except linalg.LinAlgError as e:
        raise NumericalError(f"SVD did not converge in pinv: {e}") from e


def solve_hermitian(lhs: ComplexMatrix, rhs: np.ndarray) -> np.ndarray:
    """
    Solve lhs @ X = rhs for Hermitian lhs without forming an inverse.

    Args:
        lhs: Square Hermitian matrix
        rhs: Right-hand side, matrix or vector with lhs.shape[0] rows

    Returns:
        Solution X with the shape of rhs
    """
    a = as_complex_matrix(lhs)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"solve_hermitian needs a square lhs, got {a.shape}")
    b = np.asarray(rhs, dtype=np.complex128)
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"rhs has {b.shape[0]} rows, lhs has {a.shape[0]}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * scale:
        raise NumericalError("solve_hermitian received a non-Hermitian lhs")
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise NumericalError(f"lhs is singular or ill-conditioned (cond={cond:.3e})")
    return linalg.solve(hermitize(a), b, assume_a="her")


def vec(m: ComplexMatrix) -> ComplexVector:
    """Column-stacking vectorisation."""
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise DimensionError(f"vec expects a matrix, got shape {arr.shape}")
    return arr.reshape(-1, order="F")


def unvec(v: ComplexVector, rows: int, cols: int) -> ComplexMatrix:
    """Inverse of vec: refill a rows x cols matrix column by column."""
    arr = np.asarray(v)
    if arr.ndim != 1 or arr.size != rows * cols:
        raise DimensionError(f"Cannot unvec length {arr.size} into {rows}x{cols}")
    return arr.reshape(rows, cols, order="F")


def spectral_radius(m: ComplexMatrix) -> float:
    """Largest eigenvalue modulus."""
    return float(np.max(np.abs(linalg.eigvals(as_complex_matrix(m)))))


def complex_gaussian(rng: np.random.Generator, size, scale: float = 1.0) -> np.ndarray:
    """
    Circular complex Gaussian samples with E|z|^2 = scale^2.

    Real and imaginary parts are independent with variance scale^2 / 2.
    """
    std = scale / np.sqrt(2.0)
    return std * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def covariance_factor(cov: ComplexMatrix) -> ComplexMatrix:
    """Return L with L @ L^H == cov for a Hermitian PSD covariance."""
    eigvals, eigvecs = linalg.eigh(hermitize(as_complex_matrix(cov)))
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def block_companion(phi: ComplexMatrix, block: int) -> ComplexMatrix:
    """
    Block companion matrix of a stacked coefficient matrix.

    Args:
        phi: Horizontal stack [Phi_1 ... Phi_p] of shape (block, p*block)
        block: Block size

    Returns:
        (p*block x p*block) matrix with phi as top block-row and identity blocks on the sub-diagonal
    """
    coeffs = as_complex_matrix(phi)
    if coeffs.shape[0] != block or coeffs.shape[1] % block != 0:
        raise DimensionError(f"Coefficient stack of shape {coeffs.shape} does not match block size {block}")
    dim = coeffs.shape[1]
    companion = np.zeros((dim, dim), dtype=np.complex128)
    companion[:block, :] = coeffs
    companion[block:, :-block] = np.eye(dim - block)
    return companion

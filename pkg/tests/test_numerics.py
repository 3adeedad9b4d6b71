import numpy as np
import numpy.testing as npt
import pytest

from app.exceptions import DimensionError, NumericalError
from app.numerics import (
    block_companion,
    complex_gaussian,
    covariance_factor,
    hermitize,
    kron,
    pinv,
    psd_clip,
    solve_hermitian,
    spectral_radius,
    unvec,
    vec,
)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestKron:
    def test_identity(self):
        npt.assert_array_equal(kron(np.eye(1), np.eye(3)), np.eye(3))

    def test_scalar_scaling(self):
        npt.assert_array_equal(kron([[2]], [[0, 1], [1, 0]]), [[0, 2], [2, 0]])

    def test_block_expansion(self):
        expected = [[1, 0, 2, 0], [0, 1, 0, 2], [3, 0, 4, 0], [0, 3, 0, 4]]
        npt.assert_array_equal(kron([[1, 2], [3, 4]], np.eye(2)), expected)


class TestPinv:
    def test_identity(self):
        npt.assert_allclose(pinv(np.eye(4)), np.eye(4), atol=1e-12)

    def test_scaled_identity(self):
        npt.assert_allclose(pinv((2 - 1j) * np.eye(3)), np.eye(3) / (2 - 1j), atol=1e-12)

    def test_full_column_rank_matches_normal_equations(self):
        rng = np.random.default_rng(0)
        m = random_complex(rng, 3, 2)
        expected = np.linalg.solve(m.conj().T @ m, m.conj().T)
        npt.assert_allclose(pinv(m), expected, atol=1e-10)

    def test_penrose_identities(self):
        rng = np.random.default_rng(1)
        m = random_complex(rng, 4, 2) @ random_complex(rng, 2, 5)
        x = pinv(m)
        scale = np.linalg.norm(m)
        assert np.linalg.norm(m @ x @ m - m) < 1e-10 * scale
        assert np.linalg.norm(x @ m @ x - x) < 1e-10 * np.linalg.norm(x)
        npt.assert_allclose(m @ x, (m @ x).conj().T, atol=1e-10)
        npt.assert_allclose(x @ m, (x @ m).conj().T, atol=1e-10)

    def test_zero_matrix_rejected(self):
        with pytest.raises(NumericalError):
            pinv(np.zeros((2, 2)))


class TestSolveHermitian:
    def test_identity(self):
        rng = np.random.default_rng(2)
        r = random_complex(rng, 3, 2)
        npt.assert_allclose(solve_hermitian(np.eye(3), r), r)

    def test_diagonal(self):
        npt.assert_allclose(solve_hermitian(2 * np.eye(2), [[4], [6]]), [[2], [3]])

    def test_residual_on_random_hpd(self):
        rng = np.random.default_rng(3)
        g = random_complex(rng, 6, 6)
        a = g @ g.conj().T + 6 * np.eye(6)
        b = random_complex(rng, 6, 3)
        x = solve_hermitian(a, b)
        assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-8

    def test_non_hermitian_rejected(self):
        with pytest.raises(NumericalError):
            solve_hermitian([[1, 2], [0, 1]], np.ones(2))

    def test_singular_rejected(self):
        with pytest.raises(NumericalError):
            solve_hermitian([[1, 1], [1, 1]], np.ones(2))

    def test_row_mismatch(self):
        with pytest.raises(DimensionError):
            solve_hermitian(np.eye(2), np.ones(3))


class TestVec:
    def test_column_order(self):
        npt.assert_array_equal(vec(np.array([[1, 3], [2, 4]])), [1, 2, 3, 4])

    def test_unvec(self):
        npt.assert_array_equal(unvec(np.array([1, 2, 3, 4]), 2, 2), [[1, 3], [2, 4]])

    def test_unvec_then_vec(self):
        v = random_complex(np.random.default_rng(4), 6)
        npt.assert_array_equal(vec(unvec(v, 3, 2)), v)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            unvec(np.arange(5), 2, 2)


def test_block_companion_structure():
    phi = np.hstack([2 * np.eye(2), 3 * np.eye(2), 4 * np.eye(2)])
    a = block_companion(phi, 2)
    assert a.shape == (6, 6)
    npt.assert_array_equal(a[:2], phi)
    npt.assert_array_equal(a[2:, :4], np.eye(4))
    npt.assert_array_equal(a[2:, 4:], 0)


def test_spectral_radius_of_companion():
    # h_t = 0.5 h_{t-1} + 0.3 h_{t-2}: roots of z^2 - 0.5 z - 0.3
    radius = spectral_radius(block_companion(np.array([[0.5, 0.3]]), 1))
    npt.assert_allclose(radius, (0.5 + np.sqrt(1.45)) / 2)


def test_complex_gaussian_power():
    z = complex_gaussian(np.random.default_rng(5), 200_000, scale=2.0)
    npt.assert_allclose(np.mean(np.abs(z) ** 2), 4.0, rtol=0.02)
    npt.assert_allclose(np.var(z.real), np.var(z.imag), rtol=0.02)


def test_psd_clip_removes_negative_mass():
    m = np.diag([2.0, -1.0]).astype(complex)
    npt.assert_allclose(psd_clip(m), np.diag([2.0, 0.0]), atol=1e-12)


def test_covariance_factor_reproduces_covariance():
    rng = np.random.default_rng(6)
    g = random_complex(rng, 3, 3)
    cov = hermitize(g @ g.conj().T)
    factor = covariance_factor(cov)
    npt.assert_allclose(factor @ factor.conj().T, cov, atol=1e-10)

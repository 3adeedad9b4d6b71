import numpy as np
import numpy.testing as npt
import pytest

from app.ar_ssm import (
    AutocovarianceSet,
    build_ssm,
    channel_autocov_from_signals,
    empirical_signal_autocov,
    estimate_autocovariances,
    fit_ar,
    identify_ssm,
    initial_posterior_covariance,
)
from app.ar_ssm.yule_walker import block_toeplitz, default_epsilon
from app.channel import generate_ar_oracle
from app.exceptions import DimensionError
from app.models.schemas import PilotConfig
from app.numerics import pinv
from app.signal import SignalSequence, make_pilot, observe, transform_pilot

from tests.helpers import ar_model


def scalar_autocov(*lags):
    return AutocovarianceSet(c_hat=[np.array([[c]], dtype=complex) for c in lags])


class TestAutocovariance:
    def test_signal_autocov_normalisation(self):
        signals = SignalSequence(observations=np.array([[1.0], [2.0], [3.0]]), sigma_v=1.0, rho=1.0)
        npt.assert_allclose(empirical_signal_autocov(signals, 0), [[7.0]])
        npt.assert_allclose(empirical_signal_autocov(signals, 1), [[4.0]])

    def test_lag_out_of_range(self):
        signals = SignalSequence(observations=np.ones((3, 1)), sigma_v=1.0, rho=1.0)
        with pytest.raises(DimensionError):
            empirical_signal_autocov(signals, 3)

    def test_noiseless_recovery_through_longer_pilot(self):
        phi = np.array([[0.8, 0.1j], [0.0, 0.7]])
        channels = generate_ar_oracle(phi, 0.2 * np.eye(2), 1, 2, 1, 200, seed=0)
        q = transform_pilot(make_pilot(PilotConfig(n_tx=2, tau=3)), rho=0.4, n_rx=1)
        signals = observe(channels, q, sigma_v=0.0, seed=5)
        h = channels.vectors()
        for k in (0, 1, 2):
            direct = (h[:h.shape[0] - k].T @ h[k:].conj()) / (h.shape[0] - 1)
            npt.assert_allclose(channel_autocov_from_signals(signals, q, 0.0, k), direct, atol=1e-10)

    def test_empirical_estimate_is_even(self):
        rng = np.random.default_rng(2)
        y = rng.standard_normal((40, 3)) + 1j * rng.standard_normal((40, 3))
        signals = SignalSequence(observations=y, sigma_v=1.0, rho=1.0)
        for k in (1, 2, 5):
            npt.assert_allclose(empirical_signal_autocov(signals, -k), empirical_signal_autocov(signals, k).conj().T, rtol=1e-12)
        q = transform_pilot(make_pilot(PilotConfig(n_tx=1, tau=1)), rho=2.0, n_rx=3)
        npt.assert_allclose(
            channel_autocov_from_signals(signals, q, 1.0, -2),
            channel_autocov_from_signals(signals, q, 1.0, 2).conj().T,
            rtol=1e-12,
        )

    @pytest.mark.parametrize("n_tx,tau,n_rx", [(1, 1, 1), (1, 1, 4), (2, 2, 4), (2, 3, 2), (4, 4, 2)])
    def test_pilot_is_left_invertible(self, n_tx, tau, n_rx):
        q = transform_pilot(make_pilot(PilotConfig(n_tx=n_tx, tau=tau)), rho=0.5, n_rx=n_rx)
        npt.assert_allclose(pinv(q.q) @ q.q, np.eye(n_tx * n_rx), atol=1e-10)

    def test_negative_lag_is_hermitian_transpose(self):
        c1 = np.array([[1.0, 2.0j], [0.5, -1.0]])
        autocov = AutocovarianceSet(c_hat=[np.eye(2), c1])
        npt.assert_array_equal(autocov.lag(-1), c1.conj().T)

    def test_block_toeplitz_layout(self):
        c0 = np.array([[2.0, 0.1j], [-0.1j, 2.0]])
        c1 = np.array([[0.5, 0.2], [0.3j, 0.4]])
        c_all = block_toeplitz(AutocovarianceSet(c_hat=[c0, c1, np.zeros((2, 2))]))
        npt.assert_array_equal(c_all[:2, :2], c0)
        npt.assert_array_equal(c_all[:2, 2:], c1.conj().T)
        npt.assert_array_equal(c_all[2:, :2], c1)
        npt.assert_array_equal(c_all[2:, 2:], c0)

    def test_default_epsilon_scales_with_diagonal(self):
        npt.assert_allclose(default_epsilon(np.diag([2.0, 4.0])), 3e-6)


class TestFitAr:
    def test_exact_ar1(self):
        ar = fit_ar(scalar_autocov(1.0, 0.9), epsilon=0.0)
        npt.assert_allclose(ar.phi, [[0.9]], atol=1e-12)
        npt.assert_allclose(ar.sigma_u, [[0.19]], atol=1e-12)

    def test_exact_ar2(self):
        a1, a2 = 0.5, 0.3
        rho1 = a1 / (1 - a2)
        rho2 = a1 * rho1 + a2
        ar = fit_ar(scalar_autocov(1.0, rho1, rho2), epsilon=0.0)
        npt.assert_allclose(ar.phi, [[a1, a2]], atol=1e-12)
        npt.assert_allclose(ar.coefficient(2), [[a2]], atol=1e-12)
        npt.assert_allclose(ar.sigma_u, [[1 - a1 * rho1 - a2 * rho2]], atol=1e-12)

    def test_default_epsilon_is_recorded(self):
        ar = fit_ar(scalar_autocov(1.0, 0.9))
        npt.assert_allclose(ar.epsilon, 1e-6)
        npt.assert_allclose(ar.phi, [[0.9]], atol=1e-5)

    def test_order_zero_rejected(self):
        with pytest.raises(DimensionError):
            fit_ar(AutocovarianceSet(c_hat=[np.eye(2)]))

    def test_innovation_covariance_is_psd(self):
        # C_1 inconsistent with C_0: raw Sigma_u has a negative eigenvalue
        ar = fit_ar(AutocovarianceSet(c_hat=[np.eye(2), np.array([[1.2, 0.0], [0.0, 0.5]])]), epsilon=0.0)
        assert np.linalg.eigvalsh(ar.sigma_u).min() >= -1e-12

    def test_identified_from_noisy_signals(self):
        phi = np.array([[0.7 + 0.2j, 0.1], [0.0, 0.6 - 0.3j]])
        channels = generate_ar_oracle(phi, 0.3 * np.eye(2), 2, 1, 1, 30_000, seed=3)
        q = transform_pilot(make_pilot(PilotConfig(n_tx=1, tau=1)), rho=1.0, n_rx=2)
        signals = observe(channels, q, sigma_v=0.05, seed=4)
        ssm, autocov = identify_ssm(signals, q, 0.05, p=1)
        npt.assert_allclose(ssm.phi, phi, atol=0.03)
        npt.assert_allclose(ssm.sigma_u, 0.3 * np.eye(2), atol=0.03)
        assert autocov.p == 1


class TestSsm:
    def test_companion_structure(self):
        phi = np.hstack([0.5 * np.eye(2), 0.2 * np.eye(2)])
        q = transform_pilot(make_pilot(PilotConfig(n_tx=1, tau=1)), rho=2.0, n_rx=2)
        ssm = build_ssm(ar_model(phi, 0.1, p=2), q, sigma_v=0.3)

        assert (ssm.state_dim, ssm.obs_dim, ssm.mn, ssm.p) == (4, 2, 2, 2)
        npt.assert_array_equal(ssm.a[:2], phi)
        npt.assert_array_equal(ssm.a[2:, :2], np.eye(2))
        npt.assert_array_equal(ssm.b, np.vstack([np.eye(2), np.zeros((2, 2))]))
        npt.assert_allclose(ssm.d, np.hstack([q.q, np.zeros((2, 2))]))
        npt.assert_allclose(ssm.sigma_v_matrix, 0.09 * np.eye(2))
        npt.assert_allclose(ssm.process_noise[:2, :2], 0.1 * np.eye(2))
        npt.assert_array_equal(ssm.process_noise[2:], 0)

        x = np.arange(4) + 1j
        npt.assert_array_equal(ssm.extract(x), x[:2])
        assert ssm.stability_margin() > 0

    def test_pilot_width_must_match(self):
        q = transform_pilot(make_pilot(PilotConfig(n_tx=1, tau=1)), rho=1.0, n_rx=3)
        with pytest.raises(DimensionError):
            build_ssm(ar_model(0.5 * np.eye(2), 0.1), q, sigma_v=1.0)

    def test_initial_posterior_covariance(self):
        c0 = np.array([[1.0, 0.2j], [-0.2j, 1.5]])
        p0 = initial_posterior_covariance(AutocovarianceSet(c_hat=[c0, c0, c0]), 2)
        npt.assert_array_equal(p0[:2, :2], c0)
        npt.assert_array_equal(p0[2:, 2:], c0)
        npt.assert_array_equal(p0[:2, 2:], 0)


class TestRecoveryFromLongRecords:
    @pytest.mark.parametrize(
        "phi,noise_var,n_rx,p",
        [
            (np.array([[0.9]]), 0.19, 1, 1),
            (np.array([[0.5, 0.3]]), 0.5, 1, 2),
            (np.array([[0.7 + 0.2j, 0.1], [0.0, 0.6 - 0.3j]]), 0.3, 2, 1),
            (np.array([[0.5, 0.1j, 0.3, 0.0], [0.0, 0.4, 0.05, 0.2]]), 0.4, 2, 2),
        ],
    )
    def test_noiseless_signals_recover_the_model(self, phi, noise_var, n_rx, p):
        mn = phi.shape[0]
        sigma_u = noise_var * np.eye(mn)
        channels = generate_ar_oracle(phi, sigma_u, n_rx, 1, p, 100_000, seed=17)
        q = transform_pilot(make_pilot(PilotConfig(n_tx=1, tau=1)), rho=1.0, n_rx=n_rx)
        signals = observe(channels, q, sigma_v=0.0, seed=18)

        ar = fit_ar(estimate_autocovariances(signals, q, 0.0, p))
        assert np.linalg.norm(ar.phi - phi) <= 0.02 * np.linalg.norm(phi)
        assert np.linalg.norm(ar.sigma_u - sigma_u) <= 0.05 * np.linalg.norm(sigma_u)

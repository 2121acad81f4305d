"""Tests for the SE-ARD kernel and Gram matrices."""

import numpy as np
import pytest
from scipy.linalg import cholesky

from uigp.exceptions import InvalidArgumentError
from uigp.kernel import (
    JITTER_SCALE,
    KernelHyperparams,
    gram_gradients,
    gram_matrix,
    jitter_level,
    se_ard_covariance,
)


# ============================================================================
# KernelHyperparams
# ============================================================================


class TestKernelHyperparams:
    """Tests for hyperparameter validation and log-space packing."""

    def test_coerces_lengthscales_to_tuple(self):
        """A scalar or array lengthscale becomes a tuple of floats."""
        hp = KernelHyperparams(1, np.array([2]), 0)
        assert hp.lengthscales == (2.0,)
        assert hp.dim == 1

    @pytest.mark.parametrize("kwargs", [
        dict(signal_variance=0.0, lengthscales=(1.0,), noise_variance=0.1),
        dict(signal_variance=1.0, lengthscales=(1.0, -1.0), noise_variance=0.1),
        dict(signal_variance=1.0, lengthscales=(1.0,), noise_variance=-1e-3),
        dict(signal_variance=1.0, lengthscales=(), noise_variance=0.1),
    ])
    def test_rejects_invalid_values(self, kwargs):
        """Non-positive variances or lengthscales are rejected."""
        with pytest.raises(InvalidArgumentError):
            KernelHyperparams(**kwargs)

    def test_log_vector_order(self):
        """Log vector is (log σ_f², log ℓ_1..d, log σ_n²)."""
        hp = KernelHyperparams(2.0, (3.0, 4.0), 0.5)
        np.testing.assert_allclose(hp.to_log_vector(), np.log([2.0, 3.0, 4.0, 0.5]))
        back = KernelHyperparams.from_log_vector(hp.to_log_vector())
        assert back.lengthscales == pytest.approx(hp.lengthscales)

    def test_zero_noise_maps_to_minus_infinity(self):
        """Noise-free hyperparameters have log σ_n² = -inf."""
        hp = KernelHyperparams(1.0, (1.0,), 0.0)
        assert hp.to_log_vector()[-1] == -np.inf


# ============================================================================
# se_ard_covariance
# ============================================================================


class TestSeArdCovariance:
    """Tests for pointwise covariance."""

    def test_zero_distance_gives_signal_variance(self):
        """k(x, x) = σ_f²."""
        hp = KernelHyperparams(2.0, (0.7, 1.3), 0.1)
        assert se_ard_covariance([0.4, -1.0], [0.4, -1.0], hp) == pytest.approx(2.0)

    def test_one_lengthscale_apart(self):
        """|x1 - x2| = ℓ gives exp(-1/2)."""
        hp = KernelHyperparams(1.0, (2.5,), 0.0)
        assert se_ard_covariance([1.0], [3.5], hp) == pytest.approx(0.60653066, rel=1e-7)

    def test_symmetric(self, rng):
        """k(a, b) = k(b, a) for random pairs."""
        hp = KernelHyperparams(1.7, (0.5, 2.0), 0.0)
        for a, b in zip(rng.normal(size=(100, 2)), rng.normal(size=(100, 2))):
            assert se_ard_covariance(a, b, hp) == se_ard_covariance(b, a, hp)

    def test_value_in_range(self, rng):
        """Covariance lies in (0, σ_f²]."""
        hp = KernelHyperparams(3.0, (1.0,), 0.0)
        values = [se_ard_covariance(a, b, hp) for a, b in rng.normal(scale=3, size=(50, 2, 1))]
        assert all(0 < v <= 3.0 for v in values)

    def test_dimension_mismatch(self):
        """Points with the wrong dimension are rejected."""
        hp = KernelHyperparams(1.0, (1.0, 1.0), 0.0)
        with pytest.raises(InvalidArgumentError):
            se_ard_covariance([0.0], [1.0], hp)


# ============================================================================
# gram_matrix
# ============================================================================


class TestGramMatrix:
    """Tests for Gram-matrix assembly."""

    def test_single_point_with_noise(self):
        """One point with σ_f² = 1, σ_n² = 0.1 and no jitter gives [[1.1]]."""
        hp = KernelHyperparams(1.0, (1.0,), 0.1)
        K = gram_matrix([[0.3]], [[0.3]], hp, add_noise=True, jitter=0.0)
        np.testing.assert_allclose(K, [[1.1]])

    def test_noise_augmented_matrix_is_positive_definite(self, rng):
        """Cholesky succeeds with positive pivots on a random 10-point set."""
        hp = KernelHyperparams(1.0, (0.8,), 1e-2)
        X = rng.uniform(0, 5, size=(10, 1))
        L = cholesky(gram_matrix(X, X, hp, add_noise=True), lower=True)
        assert np.all(np.diag(L) > 0)

    def test_noise_free_duplicates_factorize_with_jitter(self):
        """Repeated inputs without noise still factorize thanks to the jitter."""
        hp = KernelHyperparams(4.0, (1.0,), 0.0)
        X = np.array([[1.0], [1.0], [2.0]])
        cholesky(gram_matrix(X, X, hp, add_noise=True), lower=True)

    def test_transpose_symmetry(self, rng):
        """gram_matrix(A, B) = gram_matrix(B, A)ᵀ."""
        hp = KernelHyperparams(1.3, (0.6, 1.9), 0.0)
        A, B = rng.normal(size=(7, 2)), rng.normal(size=(4, 2))
        np.testing.assert_allclose(gram_matrix(A, B, hp), gram_matrix(B, A, hp).T, atol=1e-12)

    def test_scale_invariance(self, rng):
        """Scaling inputs and lengthscales together leaves the matrix unchanged."""
        hp = KernelHyperparams(1.0, (0.5, 2.0), 0.0)
        scaled = KernelHyperparams(1.0, (5.0, 20.0), 0.0)
        X = rng.normal(size=(6, 2))
        np.testing.assert_allclose(gram_matrix(X, X, hp), gram_matrix(10 * X, 10 * X, scaled), atol=1e-12)

    def test_decays_with_distance(self):
        """Covariance decreases monotonically along one coordinate."""
        hp = KernelHyperparams(1.0, (1.0,), 0.0)
        row = gram_matrix([[0.0]], np.linspace(0, 5, 20)[:, None], hp)[0]
        assert np.all(np.diff(row) < 0)

    def test_entries_match_pointwise_covariance(self, rng):
        """Entry (i, j) equals se_ard_covariance(A_i, B_j)."""
        hp = KernelHyperparams(2.2, (0.9, 1.4), 0.0)
        A, B = rng.normal(size=(3, 2)), rng.normal(size=(2, 2))
        K = gram_matrix(A, B, hp)
        for i in range(3):
            for j in range(2):
                assert K[i, j] == pytest.approx(se_ard_covariance(A[i], B[j], hp), rel=1e-12)

    def test_default_jitter(self):
        """Default jitter is JITTER_SCALE · max(1, σ_f² + σ_n²)."""
        hp = KernelHyperparams(5.0, (1.0,), 1.0)
        K = gram_matrix([[0.0]], [[0.0]], hp, add_noise=True)
        assert jitter_level(hp) == pytest.approx(JITTER_SCALE * 6.0)
        assert K[0, 0] == pytest.approx(6.0 + JITTER_SCALE * 6.0, rel=1e-15)

    def test_add_noise_requires_same_set(self):
        """Noise on the diagonal of a cross-covariance is rejected."""
        hp = KernelHyperparams(1.0, (1.0,), 0.1)
        with pytest.raises(InvalidArgumentError):
            gram_matrix([[0.0]], [[1.0]], hp, add_noise=True)

    def test_add_noise_with_nan_inputs(self):
        """A set containing NaN is still the same set; the NaN propagates to K."""
        hp = KernelHyperparams(1.0, (1.0,), 0.1)
        X = np.array([[0.0], [np.nan]])
        K = gram_matrix(X, X.copy(), hp, add_noise=True)
        assert K[0, 0] == pytest.approx(1.1 + 1.1e-8)
        assert np.isnan(K[1, 1])

    def test_dimension_mismatch(self):
        """Input columns must match the number of lengthscales."""
        hp = KernelHyperparams(1.0, (1.0,), 0.0)
        with pytest.raises(InvalidArgumentError):
            gram_matrix(np.zeros((2, 2)), np.zeros((2, 2)), hp)


# ============================================================================
# gram_gradients
# ============================================================================


class TestGramGradients:
    """Tests for log-space derivatives of the noise-augmented Gram matrix."""

    @pytest.mark.parametrize("signal_variance", [0.3, 2.5])
    def test_match_finite_differences(self, rng, signal_variance):
        """Each derivative matches central differences, with and without the jitter floor."""
        hp = KernelHyperparams(signal_variance, (0.7, 1.6), 0.05)
        X = rng.normal(size=(5, 2))
        theta = hp.to_log_vector()
        step = 1e-6
        for k, dK in enumerate(gram_gradients(X, hp)):
            up, down = theta.copy(), theta.copy()
            up[k] += step
            down[k] -= step
            K_up = gram_matrix(X, X, KernelHyperparams.from_log_vector(up), add_noise=True)
            K_down = gram_matrix(X, X, KernelHyperparams.from_log_vector(down), add_noise=True)
            np.testing.assert_allclose(dK, (K_up - K_down) / (2 * step), atol=1e-7)

    def test_count(self):
        """There are d + 2 derivative matrices."""
        hp = KernelHyperparams(1.0, (1.0, 1.0, 1.0), 0.1)
        assert len(gram_gradients(np.zeros((2, 3)), hp)) == 5

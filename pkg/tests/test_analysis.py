"""Tests for error metrics and density estimates."""

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import iqr

from uigp.analysis import (
    build_error_report,
    input_mse,
    kde_density,
    mspe,
    relative_reduction,
    silverman_bandwidth,
)
from uigp.exceptions import DegenerateBandwidthError, InvalidArgumentError
from uigp.kernel import KernelHyperparams
from uigp.prediction import PredictiveSummary, marginal_predict
from uigp.prior import InputPrior, sample_prior


def _summary(means, variances):
    means = np.atleast_2d(np.asarray(means, dtype=float))
    variances = np.atleast_2d(np.asarray(variances, dtype=float))
    return PredictiveSummary(
        test_inputs=np.zeros((means.shape[1], 1)),
        marginal_mean=means.mean(axis=0),
        marginal_variance=variances.mean(axis=0) + means.var(axis=0),
        per_sample_means=means,
        per_sample_variances=variances,
        source='posterior',
    )


class TestInputMse:
    """Tests for input_mse."""

    def test_pure_variance(self):
        """Prior centred on the truth with s = 1 gives 1."""
        prior = InputPrior(means=[[2.0]], std_devs=[[1.0]])
        assert input_mse(prior, [[2.0]]) == pytest.approx(1.0)

    def test_pure_bias(self):
        """Prior offset by 1 with a vanishing std-dev gives 1."""
        prior = InputPrior(means=[[3.0]], std_devs=[[1e-9]])
        assert input_mse(prior, [[2.0]]) == pytest.approx(1.0)

    def test_bias_only(self):
        """bias_only drops the variance term."""
        prior = InputPrior(means=[[3.0], [0.0]], std_devs=[[2.0], [2.0]])
        assert input_mse(prior, [[2.0], [0.0]], bias_only=True) == pytest.approx(0.5)
        assert input_mse(prior, [[2.0], [0.0]]) == pytest.approx(4.5)

    def test_samples_match_closed_form(self):
        """10⁵ draws from a Gaussian match the closed form within 1%."""
        prior = InputPrior(means=[[0.5], [-1.0]], std_devs=[[1.0], [0.5]])
        truth = np.array([[0.0], [0.0]])
        rng = np.random.default_rng(12)
        draws = np.stack([sample_prior(prior, rng) for _ in range(100_000)])
        assert input_mse(draws, truth) == pytest.approx(input_mse(prior, truth), rel=0.01)

    def test_sample_estimate_converges(self):
        """Nested sample sets of 10³, 10⁴ and 10⁵ draws stay within five standard errors."""
        prior = InputPrior(means=[[0.5], [-1.0], [2.0]], std_devs=[[1.0], [0.5], [0.2]])
        truth = np.zeros((3, 1))
        exact = input_mse(prior, truth)
        rng = np.random.default_rng(5)
        draws = rng.normal(prior.means, prior.std_devs, size=(100_000, 3, 1))
        per_draw_sd = ((draws - truth) ** 2).sum(axis=(1, 2)).std() / 3
        for n in (1_000, 10_000, 100_000):
            assert abs(input_mse(draws[:n], truth) - exact) <= 5 * per_draw_sd / np.sqrt(n)
        assert input_mse(draws, truth) == pytest.approx(exact, rel=0.01)
    def test_no_uncertain_points(self):
        """Zero uncertain inputs give zero error."""
        empty = InputPrior(means=np.empty((0, 1)), std_devs=np.empty((0, 1)))
        assert input_mse(empty, np.empty((0, 1))) == 0.0
        assert input_mse(np.empty((3, 0, 1)), np.empty((0, 1))) == 0.0

    def test_rejects_empty_sample_set(self):
        """At least one sample is required."""
        with pytest.raises(InvalidArgumentError):
            input_mse(np.empty((0, 2, 1)), np.zeros((2, 1)))


class TestMspe:
    """Tests for mspe."""

    def test_perfect_prediction(self):
        """Exact means with zero variance give 0."""
        truth = np.array([1.0, -2.0, 0.5])
        assert mspe(_summary([truth, truth], np.zeros((2, 3))), truth) == 0.0

    def test_constant_offset(self):
        """A single sample offset by c gives c²."""
        truth = np.array([1.0, -2.0, 0.5])
        assert mspe(_summary(truth + 0.7, np.zeros(3)), truth) == pytest.approx(0.49)

    def test_matches_nested_sampling(self, toy_data):
        """Equals brute-force sampling of X_u then f* within 3 standard errors."""
        rng = np.random.default_rng(21)
        hp = KernelHyperparams(1.0, (1.0,), 1e-3)
        test_inputs = np.linspace(0, 5, 15)[:, None]
        samples = np.stack([sample_prior(toy_data.input_prior, rng) for _ in range(40)])
        summary = marginal_predict(samples, toy_data, hp, test_inputs)
        truth = np.sin(test_inputs[:, 0])

        n_draws = 100_000
        s = rng.integers(0, 40, size=n_draws)
        j = rng.integers(0, 15, size=n_draws)
        f = summary.per_sample_means[s, j] + np.sqrt(summary.per_sample_variances[s, j]) * rng.standard_normal(n_draws)
        errors = (f - truth[j]) ** 2
        standard_error = errors.std() / np.sqrt(n_draws)
        assert abs(errors.mean() - mspe(summary, truth)) <= 3 * standard_error

    def test_invariant_under_permutations(self, rng):
        """Reordering test points (with the truth) or samples leaves the value unchanged."""
        means = rng.normal(size=(6, 9))
        variances = rng.uniform(0.01, 0.5, size=(6, 9))
        truth = rng.normal(size=9)
        reference = mspe(_summary(means, variances), truth)
        points = rng.permutation(9)
        rows = rng.permutation(6)
        assert mspe(_summary(means[:, points], variances[:, points]), truth[points]) == pytest.approx(reference, rel=1e-12)
        assert mspe(_summary(means[rows], variances[rows]), truth) == pytest.approx(reference, rel=1e-12)

    def test_truth_length_mismatch(self):
        """One truth value per test point is required."""
        with pytest.raises(InvalidArgumentError):
            mspe(_summary(np.zeros(3), np.zeros(3)), np.zeros(2))


class TestKde:
    """Tests for silverman_bandwidth and kde_density."""

    def test_single_kernel(self):
        """One sample at 0 with bandwidth h has density 1/(h√2π) at 0."""
        h = 0.3
        assert kde_density([0.0], [0.0], bandwidth=h)[0] == pytest.approx(1 / (h * np.sqrt(2 * np.pi)))

    def test_integrates_to_one(self):
        """KDE of 10⁴ standard-normal draws integrates to 1 on [-8, 8]."""
        draws = np.random.default_rng(0).standard_normal(10_000)
        grid = np.linspace(-8, 8, 4001)
        assert trapezoid(kde_density(draws, grid), grid) == pytest.approx(1.0, abs=1e-3)

    def test_recovers_normal_density(self):
        """KDE at 0 is within 10% of 1/√2π."""
        draws = np.random.default_rng(1).standard_normal(10_000)
        assert kde_density(draws, [0.0])[0] == pytest.approx(1 / np.sqrt(2 * np.pi), rel=0.1)

    def test_blocks_match_direct_evaluation(self, rng):
        """Grids longer than one evaluation block give the same values."""
        draws = rng.normal(size=50)
        grid = np.linspace(-3, 3, 700)
        h = silverman_bandwidth(draws)
        direct = np.exp(-0.5 * ((grid[:, None] - draws) / h) ** 2).sum(axis=1) / (len(draws) * h * np.sqrt(2 * np.pi))
        np.testing.assert_allclose(kde_density(draws, grid), direct, rtol=1e-10)

    def test_invariant_under_sample_order(self, rng):
        """Shuffling the samples leaves the density unchanged."""
        draws = rng.normal(size=200)
        grid = np.linspace(-4, 4, 50)
        np.testing.assert_allclose(kde_density(rng.permutation(draws), grid), kde_density(draws, grid), rtol=1e-10)

    def test_scales_with_inputs(self, rng):
        """Scaling samples, grid and bandwidth by a divides the density by a."""
        draws = rng.normal(size=100)
        grid = np.linspace(-3, 3, 40)
        a, h = 3.7, 0.4
        np.testing.assert_allclose(
            kde_density(a * draws, a * grid, bandwidth=a * h),
            kde_density(draws, grid, bandwidth=h) / a,
            rtol=1e-10,
        )

    def test_silverman_rule(self):
        """1.06 · min(std, IQR / 1.34) · n^(-1/5)."""
        x = np.array([0.0, 1.0, 2.0, 3.0, 10.0])
        expected = 1.06 * min(np.std(x, ddof=1), iqr(x) / 1.34) * 5 ** (-0.2)
        assert silverman_bandwidth(x) == pytest.approx(expected)

    def test_zero_iqr_falls_back_to_std(self):
        """With IQR 0 the std-dev is used."""
        x = np.array([0.0] * 8 + [1.0, -1.0])
        assert silverman_bandwidth(x) == pytest.approx(1.06 * np.std(x, ddof=1) * 10 ** (-0.2))

    def test_identical_samples(self):
        """Identical samples need an explicit bandwidth."""
        with pytest.raises(DegenerateBandwidthError):
            kde_density(np.ones(20), [1.0])
        assert kde_density(np.ones(20), [1.0], bandwidth=0.1)[0] > 0

    def test_rejects_bad_bandwidth(self):
        """The bandwidth must be positive."""
        with pytest.raises(InvalidArgumentError):
            kde_density([0.0, 1.0], [0.0], bandwidth=0.0)


class TestRelativeReduction:
    """Tests for relative_reduction."""

    @pytest.mark.parametrize("prior_err,post_err,expected", [
        (16.42, 2.33, 85.8),
        (1.10, 0.45, 59.1),
        (5.0, 5.0, 0.0),
    ])
    def test_values(self, prior_err, post_err, expected):
        """Reductions round to the tabulated percentages."""
        assert round(relative_reduction(prior_err, post_err), 1) == expected

    def test_negative_when_worse(self):
        """A worse posterior gives a negative reduction."""
        assert relative_reduction(1.0, 1.5) == pytest.approx(-50.0)

    def test_rejects_nonpositive_prior(self):
        """A zero prior error is rejected."""
        with pytest.raises(InvalidArgumentError):
            relative_reduction(0.0, 0.0)


class TestBuildErrorReport:
    """Tests for build_error_report."""

    def test_fields(self):
        """Reductions are computed from the four errors."""
        prior = InputPrior(means=[[1.0]], std_devs=[[1.0]])
        posterior_samples = np.array([[[0.1]], [[-0.1]]])
        truth = np.zeros(3)
        report = build_error_report(
            prior, posterior_samples, [[0.0]],
            _summary(np.ones(3), np.ones(3)), _summary(np.zeros(3), 0.5 * np.ones(3)), truth,
        )
        assert report.input_mse_prior == pytest.approx(2.0)
        assert report.input_mse_posterior == pytest.approx(0.01)
        assert report.mspe_prior == pytest.approx(2.0)
        assert report.mspe_posterior == pytest.approx(0.5)
        assert report.relative_reduction_inputs == pytest.approx(99.5)
        assert report.relative_reduction_mspe == pytest.approx(75.0)
        assert set(report.to_dict()) == {
            'input_mse_prior', 'input_mse_posterior', 'mspe_prior', 'mspe_posterior',
            'relative_reduction_inputs', 'relative_reduction_mspe',
        }

    def test_zero_prior_error_gives_zero_reduction(self):
        """Without uncertain inputs both reductions are 0."""
        empty = InputPrior(means=np.empty((0, 1)), std_devs=np.empty((0, 1)))
        summary = _summary(np.zeros(3), np.ones(3))
        report = build_error_report(empty, np.empty((1, 0, 1)), np.empty((0, 1)), summary, summary, np.zeros(3))
        assert report.relative_reduction_inputs == 0.0
        assert report.relative_reduction_mspe == 0.0

"""Error metrics, relative reductions and kernel density estimates."""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import iqr, norm

from .exceptions import DegenerateBandwidthError, InvalidArgumentError
from .prediction import PredictiveSummary
from .prior import InputPrior

# Grid points evaluated per block in kde_density; bounds memory at block × n.
_KDE_BLOCK = 256


@dataclass(frozen=True)
class ErrorReport:
    """Prior-versus-posterior errors against the ground truth.

    Reductions are ``100 · (prior - posterior) / prior`` and are negative
    when inference made things worse.

    Attributes:
        input_mse_prior: Input-location MSE under the prior
        input_mse_posterior: Input-location MSE under the posterior
        mspe_prior: MSPE of the prior-marginalized prediction
        mspe_posterior: MSPE of the posterior-marginalized prediction
        relative_reduction_inputs: Percent reduction of the input MSE
        relative_reduction_mspe: Percent reduction of the MSPE
    """
    input_mse_prior: float
    input_mse_posterior: float
    mspe_prior: float
    mspe_posterior: float
    relative_reduction_inputs: float
    relative_reduction_mspe: float

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}


def input_mse(source: InputPrior | np.ndarray, truth, bias_only: bool = False) -> float:
    """Mean squared error of the uncertain input locations.

    Computes (1/N_u) E[‖X_u - X̂_u‖²] with X_u distributed as ``source``:

    - an :class:`InputPrior`: closed form (1/N_u) Σ_ij [(μ_ij - x̂_ij)² + s_ij²];
      ``bias_only`` drops the variance term
    - an S × N_u × d array of samples: Monte Carlo average over the samples

    Returns 0 when there are no uncertain inputs.

    Raises:
        InvalidArgumentError: On shape mismatch or an empty sample set
    """
    truth = np.asarray(truth, dtype=float)
    if isinstance(source, InputPrior):
        truth = truth.reshape(source.shape)
        if source.n_points == 0:
            return 0.0
        squared = (source.means - truth) ** 2
        if not bias_only:
            squared = squared + source.std_devs ** 2
        return float(squared.sum() / source.n_points)

    samples = np.asarray(source, dtype=float)
    if samples.ndim != 3 or samples.shape[0] == 0:
        raise InvalidArgumentError(
            f"Expected a non-empty S × N_u × d sample array, got shape {samples.shape}",
            argument='samples', value=samples.shape,
        )
    truth = truth.reshape(samples.shape[1:])
    if samples.shape[1] == 0:
        return 0.0
    squared_norms = ((samples - truth) ** 2).sum(axis=(1, 2))
    return float(squared_norms.mean() / samples.shape[1])


def mspe(summary: PredictiveSummary, truth_values) -> float:
    """Mean squared prediction error against the ground-truth function.

    The inner expectation over f* given X_u is taken analytically per sample
    as squared bias plus predictive variance, then averaged over samples and
    test points.

    Raises:
        InvalidArgumentError: If ``truth_values`` does not have one value per test point
    """
    truth_values = np.asarray(truth_values, dtype=float).reshape(-1)
    if truth_values.shape[0] != summary.per_sample_means.shape[1]:
        raise InvalidArgumentError(
            f"{summary.per_sample_means.shape[1]} test points but {truth_values.shape[0]} truth values",
            argument='truth_values', value=truth_values.shape,
        )
    per_point = (summary.per_sample_means - truth_values) ** 2 + summary.per_sample_variances
    return float(per_point.mean())


def silverman_bandwidth(samples) -> float:
    """1.06 · min(std, IQR / 1.34) · n^(-1/5).

    Falls back to the std when the IQR is zero but the samples are not all equal.

    Raises:
        DegenerateBandwidthError: If fewer than two samples, or all samples equal
    """
    samples = np.asarray(samples, dtype=float).reshape(-1)
    n = samples.shape[0]
    if n < 2:
        raise DegenerateBandwidthError("Automatic bandwidth needs at least two samples")
    std = np.std(samples, ddof=1)
    if not std > 0:
        raise DegenerateBandwidthError("All samples are identical; pass an explicit bandwidth")
    spread = iqr(samples) / 1.34
    scale = min(std, spread) if spread > 0 else std
    return float(1.06 * scale * n ** (-0.2))


def kde_density(samples, grid, bandwidth: float = None) -> np.ndarray:
    """Gaussian kernel density estimate evaluated on a grid.

    Args:
        samples: n scalar samples
        grid: g evaluation points
        bandwidth: Kernel standard deviation (default: :func:`silverman_bandwidth`)

    Returns:
        g nonnegative density values
    """
    samples = np.asarray(samples, dtype=float).reshape(-1)
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if samples.shape[0] == 0:
        raise InvalidArgumentError("kde_density needs at least one sample", argument='samples')
    if bandwidth is None:
        bandwidth = silverman_bandwidth(samples)
    elif not bandwidth > 0:
        raise InvalidArgumentError("bandwidth must be positive", argument='bandwidth', value=bandwidth)

    density = np.empty(grid.shape[0])
    for start in range(0, grid.shape[0], _KDE_BLOCK):
        block = grid[start:start + _KDE_BLOCK]
        z = (block[:, None] - samples[None, :]) / bandwidth
        density[start:start + _KDE_BLOCK] = norm.pdf(z).mean(axis=1) / bandwidth
    return density


def relative_reduction(prior_err: float, post_err: float) -> float:
    """Percent error reduction from prior to posterior.

    Raises:
        InvalidArgumentError: If ``prior_err`` is not positive
    """
    if not prior_err > 0:
        raise InvalidArgumentError("prior_err must be positive", argument='prior_err', value=prior_err)
    return 100.0 * (prior_err - post_err) / prior_err


def build_error_report(
    prior: InputPrior,
    posterior_samples: np.ndarray,
    truth_locations,
    prior_summary: PredictiveSummary,
    posterior_summary: PredictiveSummary,
    truth_values,
) -> ErrorReport:
    """Assemble the prior-versus-posterior error table for one experiment.

    A reduction whose prior error is zero (e.g. no uncertain inputs) is
    reported as 0.
    """
    mse_prior = input_mse(prior, truth_locations)
    mse_posterior = input_mse(posterior_samples, truth_locations)
    mspe_prior = mspe(prior_summary, truth_values)
    mspe_posterior = mspe(posterior_summary, truth_values)

    def reduction(before: float, after: float) -> float:
        if before == after or before <= 0:
            return 0.0
        return relative_reduction(before, after)

    return ErrorReport(
        input_mse_prior=mse_prior,
        input_mse_posterior=mse_posterior,
        mspe_prior=mspe_prior,
        mspe_posterior=mspe_posterior,
        relative_reduction_inputs=reduction(mse_prior, mse_posterior),
        relative_reduction_mspe=reduction(mspe_prior, mspe_posterior),
    )

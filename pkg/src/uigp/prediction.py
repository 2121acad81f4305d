"""Predictive distributions marginalized over the uncertain inputs.

Each sample of X^u gives an ordinary GP prediction; the marginal moments
follow from the laws of total expectation and total variance:

    mean     = (1/S) Σ_s m_s(x*)
    variance = (1/S) Σ_s v_s(x*) + (1/S) Σ_s (m_s(x*) - mean)²

The between-sample term uses the population (divisor S) convention.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .exceptions import IllConditionedKernelError, InvalidArgumentError, PredictionFailedError
from .gp import Prediction, TrainingData, gp_fit, gp_predict
from .kernel import KernelHyperparams
from .prior import InputPrior, sample_prior

logger = logging.getLogger(__name__)

Source = Literal['prior', 'posterior', 'surrogate']

# Default cap on the number of samples pushed through per-sample GP fits.
MAX_PREDICTION_SAMPLES = 1000
# Fraction of per-sample fits allowed to fail before the prediction errors out.
MAX_DROPPED_FRACTION = 0.05


@dataclass(frozen=True)
class PredictiveSummary:
    """Marginal predictive moments plus the per-sample moments they came from.

    Attributes:
        test_inputs: m × d test points
        marginal_mean: m vector
        marginal_variance: m vector
        per_sample_means: S × m matrix
        per_sample_variances: S × m matrix
        source: Which distribution over X^u was marginalized
        dropped: Samples dropped because their GP fit failed
    """
    test_inputs: np.ndarray
    marginal_mean: np.ndarray
    marginal_variance: np.ndarray
    per_sample_means: np.ndarray
    per_sample_variances: np.ndarray
    source: Source
    dropped: int = 0

    @property
    def n_samples(self) -> int:
        return self.per_sample_means.shape[0]

    @property
    def band(self) -> tuple[np.ndarray, np.ndarray]:
        """(mean - 2σ, mean + 2σ)."""
        half_width = 2.0 * np.sqrt(self.marginal_variance)
        return self.marginal_mean - half_width, self.marginal_mean + half_width


def _as_test_inputs(test_inputs, dim: int) -> np.ndarray:
    X = np.asarray(test_inputs, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[1] != dim:
        raise InvalidArgumentError(
            f"test_inputs must be an m × {dim} matrix, got shape {X.shape}",
            argument='test_inputs', value=X.shape,
        )
    return X


def stride_subsample(samples: np.ndarray, max_samples: int) -> np.ndarray:
    """Deterministic, evenly strided subset of at most ``max_samples`` samples."""
    if samples.shape[0] <= max_samples:
        return samples
    index = np.linspace(0, samples.shape[0] - 1, max_samples).round().astype(int)
    return samples[index]


def _predict_one(
    sample: np.ndarray,
    data: TrainingData,
    hp: KernelHyperparams,
    test_inputs: np.ndarray,
) -> Optional[Prediction]:
    try:
        model = gp_fit(data.stack_inputs(sample), data.outputs, hp)
    except IllConditionedKernelError as e:
        logger.warning("dropping sample: %s", e.message)
        return None
    return gp_predict(model, test_inputs)


def _summarize(
    samples: np.ndarray,
    data: TrainingData,
    hp: KernelHyperparams,
    test_inputs: np.ndarray,
    source: Source,
    n_jobs: int,
) -> PredictiveSummary:
    predictions = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_predict_one)(s, data, hp, test_inputs) for s in samples
    )
    kept = [p for p in predictions if p is not None]
    dropped = len(predictions) - len(kept)
    if not kept:
        raise PredictionFailedError(
            f"GP fit failed for all {len(predictions)} samples", dropped=dropped, total=len(predictions),
        )
    if dropped > MAX_DROPPED_FRACTION * len(predictions):
        raise PredictionFailedError(
            f"GP fit failed for {dropped} of {len(predictions)} samples (more than "
            f"{MAX_DROPPED_FRACTION:.0%})", dropped=dropped, total=len(predictions),
        )

    means = np.vstack([p.mean for p in kept])
    variances = np.vstack([p.variance for p in kept])
    marginal_mean = means.mean(axis=0)
    marginal_variance = variances.mean(axis=0) + means.var(axis=0)
    return PredictiveSummary(
        test_inputs=test_inputs,
        marginal_mean=marginal_mean,
        marginal_variance=np.maximum(marginal_variance, 0.0),
        per_sample_means=means,
        per_sample_variances=variances,
        source=source,
        dropped=dropped,
    )


def marginal_predict(
    samples: Sequence[np.ndarray] | np.ndarray,
    data: TrainingData,
    hp: KernelHyperparams,
    test_inputs,
    n_jobs: int = 1,
    max_samples: int = MAX_PREDICTION_SAMPLES,
    source: Source = 'posterior',
) -> PredictiveSummary:
    """Marginalize GP predictions over a set of X^u samples.

    Args:
        samples: S configurations of the uncertain inputs (S >= 1)
        data: Training data
        hp: Hyperparameters frozen by :func:`~uigp.gp.optimize_hyperparameters`
        test_inputs: m × d test points
        n_jobs: Per-sample fits run on this many threads
        max_samples: Samples beyond this are stride-subsampled
        source: Tag recorded in the summary

    Returns:
        PredictiveSummary

    Raises:
        PredictionFailedError: If every per-sample fit fails, or more than 5% of them
    """
    test_inputs = _as_test_inputs(test_inputs, data.dim)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 2:
        samples = samples[None]
    if samples.shape[0] < 1 or samples.shape[1:] != data.input_prior.shape:
        raise InvalidArgumentError(
            f"samples must be S × {data.input_prior.shape} with S >= 1, got {samples.shape}",
            argument='samples', value=samples.shape,
        )
    if data.n_uncertain == 0:
        # Every sample is the same empty configuration
        samples = samples[:1]
    samples = stride_subsample(samples, max_samples)
    return _summarize(samples, data, hp, test_inputs, source, n_jobs)


def prior_marginal_predict(
    prior: InputPrior,
    n_samples: int,
    data: TrainingData,
    hp: KernelHyperparams,
    test_inputs,
    seed: int = 0,
    n_jobs: int = 1,
) -> PredictiveSummary:
    """Marginalize GP predictions over i.i.d. draws from the input prior."""
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be at least 1", argument='n_samples', value=n_samples)
    if prior.n_points == 0:
        n_samples = 1
    rng = np.random.default_rng(seed)
    samples = np.stack([sample_prior(prior, rng) for _ in range(n_samples)])
    return marginal_predict(
        samples, data, hp, test_inputs, n_jobs=n_jobs, max_samples=n_samples, source='prior',
    )


def surrogate_predict(data: TrainingData, hp: KernelHyperparams, test_inputs) -> PredictiveSummary:
    """Standard GP prediction with uncertain inputs fixed at their prior means."""
    return marginal_predict(data.input_prior.means, data, hp, test_inputs, source='surrogate')

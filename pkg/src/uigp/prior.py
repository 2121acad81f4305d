"""Independent Gaussian priors over uncertain input locations."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .exceptions import InvalidArgumentError


@dataclass(frozen=True)
class InputPrior:
    """Per-point, per-coordinate Gaussian prior x_ij ~ N(μ_ij, s_ij²).

    Standard deviations are given in input units; ±2s is the 95% interval.

    Attributes:
        means: N_u × d matrix of prior means
        std_devs: N_u × d matrix of prior standard deviations (all > 0)
    """
    means: np.ndarray
    std_devs: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        std_devs = np.asarray(self.std_devs, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        if std_devs.ndim == 0:
            std_devs = np.full_like(means, float(std_devs))
        elif std_devs.ndim == 1:
            std_devs = std_devs[:, None]

        if means.ndim != 2 or means.shape != std_devs.shape:
            raise InvalidArgumentError(
                f"means {means.shape} and std_devs {std_devs.shape} must be matching N_u × d matrices",
                argument='std_devs', value=std_devs.shape,
            )
        if not np.all(std_devs > 0):
            raise InvalidArgumentError(
                "Every prior standard deviation must be positive; place exact locations in the fixed inputs",
                argument='std_devs',
            )
        object.__setattr__(self, 'means', means)
        object.__setattr__(self, 'std_devs', std_devs)

    @classmethod
    def isotropic(cls, means, std: float) -> "InputPrior":
        """Prior with the same standard deviation on every coordinate."""
        means = np.asarray(means, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        return cls(means=means, std_devs=np.full_like(means, std))

    @property
    def shape(self) -> tuple[int, int]:
        """(N_u, d)."""
        return self.means.shape

    @property
    def n_points(self) -> int:
        return self.means.shape[0]


def log_prior_density(candidate, prior: InputPrior) -> float:
    """Joint log-density of a candidate configuration of uncertain inputs.

    Args:
        candidate: N_u × d matrix
        prior: Input prior of the same shape

    Returns:
        Σ_ij log N(x_ij; μ_ij, s_ij²); 0 when there are no uncertain inputs

    Raises:
        InvalidArgumentError: If the shapes differ
    """
    candidate = np.asarray(candidate, dtype=float)
    if candidate.shape != prior.shape:
        raise InvalidArgumentError(
            f"Candidate shape {candidate.shape} does not match prior shape {prior.shape}",
            argument='candidate', value=candidate.shape,
        )
    return float(np.sum(norm.logpdf(candidate, loc=prior.means, scale=prior.std_devs)))


def sample_prior(prior: InputPrior, rng: np.random.Generator) -> np.ndarray:
    """Draw one N_u × d configuration from the prior.

    Args:
        prior: Input prior
        rng: Caller-owned random stream; parallel callers pass disjoint streams

    Returns:
        μ + s ⊙ z with z standard normal
    """
    return prior.means + prior.std_devs * rng.standard_normal(prior.shape)

"""Synthetic experiments: latent functions, Sobol designs and dataset generation.

Functions:
    latent: Evaluate one of the shipped latent functions
    sobol_sequence: Unscrambled Sobol points, skipping the origin
    generate_dataset: Build fixed and uncertain training data from a config
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from .exceptions import ConfigError, InvalidArgumentError, UnknownFunctionError
from .gp import TrainingData
from .mcmc import MetropolisConfig
from .prior import InputPrior

SOBOL_MAX_DIM = 16
STREAM_NAMES = ('noise', 'perturbation', 'optimizer', 'mcmc', 'prior_predict')

LATENT_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'demo8': lambda x: -x * np.sin(x / 3.0),
    'a': lambda x: 0.5 * x * np.sin(x),
    'b': lambda x: np.exp(-x / 5.0) * (np.sin(x) + x),
    'c': lambda x: -7.0 * np.sin(x / 3.0) + 2.0 * np.sin(10.0 * x / 9.0),
    'd': lambda x: 0.5 * np.log((np.sin(2.0 * x) + 2.0) * x ** 2 + 1.0),
}


def latent(function_id: str, x):
    """Evaluate a latent function.

    Args:
        function_id: One of ``demo8``, ``a``, ``b``, ``c``, ``d``
        x: Scalar or array of inputs

    Returns:
        float for scalar input, array otherwise

    Raises:
        UnknownFunctionError: If ``function_id`` is not shipped
    """
    try:
        fn = LATENT_FUNCTIONS[function_id]
    except KeyError:
        raise UnknownFunctionError(
            f"Unknown latent function '{function_id}'. Choose from: {', '.join(LATENT_FUNCTIONS)}",
            function_id=function_id,
        ) from None
    values = fn(np.asarray(x, dtype=float))
    return float(values) if np.ndim(values) == 0 else values


def sobol_sequence(n: int, d: int) -> np.ndarray:
    """First ``n`` unscrambled Sobol points in [0, 1)^d, skipping the all-zeros point.

    Uses the Joe-Kuo direction numbers shipped with SciPy.

    Raises:
        InvalidArgumentError: If ``d`` is outside [1, 16] or ``n`` is negative
    """
    if not 1 <= d <= SOBOL_MAX_DIM:
        raise InvalidArgumentError(f"Sobol dimension must be in [1, {SOBOL_MAX_DIM}], got {d}", argument='d', value=d)
    if n < 0:
        raise InvalidArgumentError(f"n must be nonnegative, got {n}", argument='n', value=n)
    if n == 0:
        return np.empty((0, d))
    sampler = qmc.Sobol(d, scramble=False)
    sampler.fast_forward(1)
    with warnings.catch_warnings():
        # balance-property warning for n not a power of two
        warnings.simplefilter('ignore', UserWarning)
        return sampler.random(n)


def random_streams(seed: int) -> dict[str, int]:
    """Independent integer seeds for each random stage, derived from the master seed."""
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {name: int(child.generate_state(1)[0]) for name, child in zip(STREAM_NAMES, children)}


@dataclass(frozen=True)
class ExperimentConfig:
    """One synthetic experiment.

    ``mcmc.seed`` is not used by the pipeline; the sampler seed is derived
    from ``seed`` like every other random stage.

    Attributes:
        function_id: Latent function (demo8, a, b, c, d)
        domain: Input interval
        n_fixed: Points with exactly known inputs
        n_uncertain: Points whose inputs are only known through the prior
        n_test: Evenly spaced test points over the domain
        perturbation: Interval of the uniform offset ε added to true locations
        prior_std: Prior standard deviation s of every uncertain input
        output_noise_std: Data-generation noise σ; None selects the preset rule
        mcmc: Sampler settings
        seed: Master seed
        restarts: Hyperparameter optimizer restarts
        prior_samples: Draws used for the prior-marginalized prediction
        max_prediction_samples: Cap on chain samples used for prediction
        kde_points: Grid points of each KDE table
        shared_perturbation_seed: Draw ε from this seed instead of the master seed
        noise_variance: Hold the kernel σ_n² at this value during fitting; None optimizes it
    """
    function_id: str = 'demo8'
    domain: tuple[float, float] = (0.0, 8.0 * math.pi)
    n_fixed: int = 4
    n_uncertain: int = 4
    n_test: int = 100
    perturbation: tuple[float, float] = (0.0, 2.0)
    prior_std: float = 2.0
    output_noise_std: Optional[float] = None
    mcmc: MetropolisConfig = field(default_factory=MetropolisConfig)
    seed: int = 0
    restarts: int = 8
    prior_samples: int = 1000
    max_prediction_samples: int = 1000
    kde_points: int = 512
    shared_perturbation_seed: Optional[int] = None
    noise_variance: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'domain', tuple(float(v) for v in self.domain))
        object.__setattr__(self, 'perturbation', tuple(float(v) for v in self.perturbation))

        if self.function_id not in LATENT_FUNCTIONS:
            raise ConfigError(
                f"Unknown function_id '{self.function_id}'. Choose from: {', '.join(LATENT_FUNCTIONS)}",
                field='function_id', value=self.function_id,
            )
        if len(self.domain) != 2 or not self.domain[0] < self.domain[1]:
            raise ConfigError("domain must be an interval [low, high] with low < high", field='domain', value=self.domain)
        if len(self.perturbation) != 2 or self.perturbation[0] > self.perturbation[1]:
            raise ConfigError("perturbation must be an interval [low, high]", field='perturbation', value=self.perturbation)
        if self.n_fixed < 0 or self.n_uncertain < 0 or self.n_fixed + self.n_uncertain < 1:
            raise ConfigError(
                "n_fixed and n_uncertain must be nonnegative with at least one point in total",
                field='n_fixed', value=(self.n_fixed, self.n_uncertain),
            )
        if self.n_test < 2:
            raise ConfigError("n_test must be at least 2", field='n_test', value=self.n_test)
        if not self.prior_std > 0:
            raise ConfigError(
                "prior_std must be positive; put exactly known inputs in n_fixed",
                field='prior_std', value=self.prior_std,
            )
        if self.output_noise_std is not None and self.output_noise_std < 0:
            raise ConfigError("output_noise_std must be nonnegative", field='output_noise_std', value=self.output_noise_std)
        if self.noise_variance is not None and not self.noise_variance > 0:
            raise ConfigError("noise_variance must be positive", field='noise_variance', value=self.noise_variance)
        for name in ('restarts', 'prior_samples', 'max_prediction_samples', 'kde_points'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1", field=name, value=getattr(self, name))

    @classmethod
    def preset(cls, function_id: str, **overrides) -> "ExperimentConfig":
        """Full-scale defaults for a latent function.

        ``demo8`` uses 4 fixed + 4 uncertain points with s = 2 and no output
        noise; ``a``-``d`` use 30 + 30 points with s = 1 and the relative
        noise default.
        """
        if function_id == 'demo8':
            base = dict(n_fixed=4, n_uncertain=4, prior_std=2.0)
        else:
            base = dict(n_fixed=30, n_uncertain=30, prior_std=1.0)
        base.update(overrides)
        return cls(function_id=function_id, **base)

    def noise_std(self) -> float:
        """Output noise σ actually used for data generation.

        Explicit values win; otherwise demo8 is noise-free and the other
        functions use 0.1 · std of the latent function over the domain.
        """
        if self.output_noise_std is not None:
            return float(self.output_noise_std)
        if self.function_id == 'demo8':
            return 0.0
        grid = np.linspace(*self.domain, 1000)
        return 0.1 * float(np.std(latent(self.function_id, grid)))


@dataclass(frozen=True)
class GeneratedDataset:
    """Training data together with the ground truth it was generated from.

    Attributes:
        data: Training data with the perturbed prior
        truth_locations: N_u × 1 true uncertain inputs x̂^u
        function_id: Latent function
        test_inputs: n_test evenly spaced test points
        test_truth: Latent function at the test points
        noise_std: Output noise σ that was applied
    """
    data: TrainingData
    truth_locations: np.ndarray
    function_id: str
    test_inputs: np.ndarray
    test_truth: np.ndarray
    noise_std: float = 0.0


def evaluation_grid(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Evenly spaced test points over the domain and the latent values there."""
    test_inputs = np.linspace(*cfg.domain, cfg.n_test)
    return test_inputs, latent(cfg.function_id, test_inputs)


def generate_dataset(cfg: ExperimentConfig) -> GeneratedDataset:
    """Generate training data for an experiment.

    Sobol points scaled to the domain are split in sequence order: the first
    ``n_fixed`` become fixed inputs, the rest the true uncertain locations.
    Outputs are the latent function plus Gaussian noise at every point, and
    the prior means are the true locations shifted by ε ~ U(perturbation).
    """
    streams = random_streams(cfg.seed)
    low, high = cfg.domain
    n_total = cfg.n_fixed + cfg.n_uncertain

    locations = low + (high - low) * sobol_sequence(n_total, 1)
    outputs = latent(cfg.function_id, locations[:, 0])
    noise_std = cfg.noise_std()
    if noise_std > 0:
        noise_rng = np.random.default_rng(streams['noise'])
        outputs = outputs + noise_std * noise_rng.standard_normal(n_total)

    truth = locations[cfg.n_fixed:]
    perturbation_seed = (
        cfg.shared_perturbation_seed if cfg.shared_perturbation_seed is not None else streams['perturbation']
    )
    epsilon = np.random.default_rng(perturbation_seed).uniform(*cfg.perturbation, size=truth.shape)

    data = TrainingData(
        fixed_inputs=locations[:cfg.n_fixed],
        fixed_outputs=outputs[:cfg.n_fixed],
        uncertain_outputs=outputs[cfg.n_fixed:],
        input_prior=InputPrior.isotropic(truth + epsilon, cfg.prior_std),
    )
    test_inputs, test_truth = evaluation_grid(cfg)
    return GeneratedDataset(
        data=data,
        truth_locations=truth,
        function_id=cfg.function_id,
        test_inputs=test_inputs,
        test_truth=test_truth,
        noise_std=noise_std,
    )

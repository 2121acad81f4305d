"""uigp - Gaussian process regression with uncertain training inputs."""

from .kernel import KernelHyperparams, se_ard_covariance, gram_matrix
from .prior import InputPrior, log_prior_density, sample_prior
from .gp import (
    TrainingData,
    FittedGP,
    log_marginal_likelihood,
    lml_gradient,
    optimize_hyperparameters,
    gp_fit,
    gp_predict,
)
from .mcmc import (
    MetropolisConfig,
    PosteriorChain,
    log_unnormalized_posterior,
    accept_proposal,
    run_metropolis,
    sample_posterior,
    chain_diagnostics,
)
from .prediction import PredictiveSummary, marginal_predict, prior_marginal_predict, surrogate_predict
from .analysis import ErrorReport, input_mse, mspe, kde_density, relative_reduction
from .experiments import ExperimentConfig, GeneratedDataset, latent, sobol_sequence, generate_dataset
from .pipeline import run_experiment
from .exceptions import (
    UIGPError,
    InvalidArgumentError,
    IllConditionedKernelError,
    OptimizationFailedError,
    InvalidInitError,
    PredictionFailedError,
    DegenerateBandwidthError,
    ConfigError,
    UnknownFunctionError,
    StageError,
)

__version__ = "0.1.0"

__all__ = [
    "KernelHyperparams",
    "se_ard_covariance",
    "gram_matrix",
    "InputPrior",
    "log_prior_density",
    "sample_prior",
    "TrainingData",
    "FittedGP",
    "log_marginal_likelihood",
    "lml_gradient",
    "optimize_hyperparameters",
    "gp_fit",
    "gp_predict",
    "MetropolisConfig",
    "PosteriorChain",
    "log_unnormalized_posterior",
    "accept_proposal",
    "run_metropolis",
    "sample_posterior",
    "chain_diagnostics",
    "PredictiveSummary",
    "marginal_predict",
    "prior_marginal_predict",
    "surrogate_predict",
    "ErrorReport",
    "input_mse",
    "mspe",
    "kde_density",
    "relative_reduction",
    "ExperimentConfig",
    "GeneratedDataset",
    "latent",
    "sobol_sequence",
    "generate_dataset",
    "run_experiment",
    "UIGPError",
    "InvalidArgumentError",
    "IllConditionedKernelError",
    "OptimizationFailedError",
    "InvalidInitError",
    "PredictionFailedError",
    "DegenerateBandwidthError",
    "ConfigError",
    "UnknownFunctionError",
    "StageError",
]

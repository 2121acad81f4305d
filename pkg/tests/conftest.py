"""Pytest configuration and fixtures for uigp tests."""

import numpy as np
import pytest

from uigp.experiments import ExperimentConfig
from uigp.gp import TrainingData
from uigp.kernel import KernelHyperparams
from uigp.mcmc import MetropolisConfig
from uigp.prior import InputPrior


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def hp_1d():
    """1-D hyperparameters with a little noise."""
    return KernelHyperparams(signal_variance=1.5, lengthscales=(1.2,), noise_variance=0.01)


@pytest.fixture
def toy_data():
    """Four fixed and three uncertain points on a sine curve.

    Yields:
        TrainingData whose prior means are displaced from the true locations
    """
    fixed = np.array([[0.0], [1.5], [3.0], [4.5]])
    truth = np.array([[0.8], [2.2], [3.7]])
    prior = InputPrior.isotropic(truth + np.array([[0.3], [-0.2], [0.25]]), 0.5)
    return TrainingData(
        fixed_inputs=fixed,
        fixed_outputs=np.sin(fixed[:, 0]),
        uncertain_outputs=np.sin(truth[:, 0]),
        input_prior=prior,
    )


@pytest.fixture
def fixed_only_data():
    """Training data without uncertain inputs."""
    fixed = np.linspace(0.0, 5.0, 6)[:, None]
    return TrainingData(
        fixed_inputs=fixed,
        fixed_outputs=np.cos(fixed[:, 0]),
        uncertain_outputs=np.empty(0),
        input_prior=InputPrior(means=np.empty((0, 1)), std_devs=np.empty((0, 1))),
    )


@pytest.fixture
def short_mcmc():
    """Sampler settings that retain 100 samples quickly."""
    return MetropolisConfig(iterations=1500, burn_in=500, thinning=10, seed=11)


@pytest.fixture
def small_experiment(short_mcmc):
    """demo8 experiment scaled down for fast end-to-end runs."""
    return ExperimentConfig.preset(
        'demo8',
        n_test=25,
        restarts=3,
        prior_samples=60,
        max_prediction_samples=60,
        kde_points=32,
        mcmc=short_mcmc,
        seed=5,
    )

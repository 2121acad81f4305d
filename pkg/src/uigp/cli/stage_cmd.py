"""Single-stage commands for the uigp CLI.

Each command reads the artifacts of the previous stage from --out and
writes its own next to them:

    uigp generate   - Generate a synthetic dataset
    uigp fit        - Fit kernel hyperparameters on the prior-mean surrogate
    uigp sample     - Sample the posterior over uncertain inputs
    uigp predict    - Prior, posterior and standard-GP predictions plus KDE tables
    uigp report     - Error report against the ground truth
"""

import click

from .. import artifacts
from ..analysis import mspe
from ..experiments import LATENT_FUNCTIONS, evaluation_grid
from ..pipeline import (
    Manifest,
    compute_predictions,
    run_stage,
    stage_analyze,
    stage_fit,
    stage_generate,
    stage_predict,
    stage_sample,
)
from .state import resolve_config, save_config
from .utils import common_options, echo_report, handle_errors


def _prepare(config_path, out_dir, seed, function_id=None, **overrides):
    cfg = resolve_config(config_path, out_dir, function_id=function_id, seed=seed, **overrides)
    save_config(cfg, out_dir)
    return cfg, Manifest.load(out_dir)


def _read_samples(out_dir, data):
    samples, _ = artifacts.read_chain(out_dir / artifacts.CHAIN_FILE, shape=data.input_prior.shape)
    return samples


@click.command()
@common_options
@click.option('--function', 'function_id', type=click.Choice(list(LATENT_FUNCTIONS)),
              help='Latent function preset (default: demo8)')
@click.option('--shared-perturbation-seed', type=int, help='Draw the prior-mean offsets from this seed')
@handle_errors
def generate(config_path, seed, out_dir, threads, function_id, shared_perturbation_seed):
    """Generate a synthetic dataset.

    Examples:

        uigp generate --function a --seed 1 --out runs/a
    """
    cfg, manifest = _prepare(config_path, out_dir, seed, function_id, shared_perturbation_seed=shared_perturbation_seed)
    dataset = run_stage(manifest, out_dir, 'generate', stage_generate, cfg, out_dir)
    click.echo(
        f"Generated {dataset.data.n_fixed} fixed and {dataset.data.n_uncertain} uncertain points "
        f"of '{cfg.function_id}' -> {out_dir / artifacts.DATASET_FILE}"
    )


@click.command()
@common_options
@handle_errors
def fit(config_path, seed, out_dir, threads):
    """Fit kernel hyperparameters on fixed inputs and prior means."""
    cfg, manifest = _prepare(config_path, out_dir, seed)
    data, _ = artifacts.read_dataset(out_dir / artifacts.DATASET_FILE)
    hp = run_stage(manifest, out_dir, 'fit', stage_fit, data, cfg, out_dir, n_jobs=threads)
    click.echo(f"Signal variance: {hp.signal_variance:.6g}")
    click.echo(f"Lengthscales: {', '.join(f'{v:.6g}' for v in hp.lengthscales)}")
    click.echo(f"Noise variance: {hp.noise_variance:.6g}")


@click.command()
@common_options
@handle_errors
def sample(config_path, seed, out_dir, threads):
    """Sample the posterior over the uncertain input locations."""
    cfg, manifest = _prepare(config_path, out_dir, seed)
    data, _ = artifacts.read_dataset(out_dir / artifacts.DATASET_FILE)
    hp = artifacts.read_hyperparams(out_dir / artifacts.HYPERPARAMS_FILE)
    chain = run_stage(manifest, out_dir, 'sample', stage_sample, data, hp, cfg, out_dir, n_jobs=threads)
    click.echo(f"Retained {chain.n_samples} samples, acceptance rate {chain.acceptance_rate:.3f}")
    for warning in chain.warnings:
        click.echo(f"Warning: {warning}")


@click.command()
@common_options
@handle_errors
def predict(config_path, seed, out_dir, threads):
    """Predict on the test grid from the prior, the posterior and the standard GP."""
    cfg, manifest = _prepare(config_path, out_dir, seed)
    data, _ = artifacts.read_dataset(out_dir / artifacts.DATASET_FILE)
    hp = artifacts.read_hyperparams(out_dir / artifacts.HYPERPARAMS_FILE)
    samples = _read_samples(out_dir, data)
    predictions = run_stage(
        manifest, out_dir, 'predict', stage_predict, data, hp, samples, cfg, out_dir, n_jobs=threads,
    )
    click.echo(f"Predicted {cfg.n_test} test points from {predictions.posterior.n_samples} posterior samples")
    if predictions.posterior.dropped:
        click.echo(f"Dropped {predictions.posterior.dropped} ill-conditioned samples")


@click.command()
@common_options
@handle_errors
def report(config_path, seed, out_dir, threads):
    """Compute the error report and print it.

    Predictions are recomputed from the dataset, hyperparameters and chain,
    since the prediction files keep only the marginal moments.
    """
    cfg, manifest = _prepare(config_path, out_dir, seed)
    data, truth = artifacts.read_dataset(out_dir / artifacts.DATASET_FILE)
    hp = artifacts.read_hyperparams(out_dir / artifacts.HYPERPARAMS_FILE)
    samples = _read_samples(out_dir, data)

    def analyze():
        predictions = compute_predictions(data, hp, samples, cfg, n_jobs=threads)
        error_report, produced = stage_analyze(data, truth, samples, predictions, cfg, out_dir)
        return (error_report, predictions), produced

    error_report, predictions = run_stage(manifest, out_dir, 'analyze', analyze)
    _, test_truth = evaluation_grid(cfg)
    echo_report(error_report, mspe(predictions.surrogate, test_truth))

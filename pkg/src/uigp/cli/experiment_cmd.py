"""End-to-end experiment command for the uigp CLI.

Commands:
    uigp experiment             - Run one experiment (generate through report)
    uigp experiment --suite     - Run functions a-d and print a summary table
"""

import click

from ..experiments import LATENT_FUNCTIONS
from ..pipeline import run_experiment, surrogate_mspe
from .state import resolve_config, save_config
from .utils import common_options, echo_report, handle_errors

SUITE_FUNCTIONS = ('a', 'b', 'c', 'd')


@click.command()
@common_options
@click.option('--function', 'function_id', type=click.Choice(list(LATENT_FUNCTIONS)),
              help='Latent function preset (default: demo8)')
@click.option('--shared-perturbation-seed', type=int,
              help='Draw the prior-mean offsets from this seed in every experiment')
@click.option('--suite', is_flag=True, help='Run functions a-d, each into <out>/<function>')
@handle_errors
def experiment(config_path, seed, out_dir, threads, function_id, shared_perturbation_seed, suite):
    """Run the full pipeline: generate, fit, sample, predict and analyze.

    Examples:

        # Demonstration with 4 fixed and 4 uncertain points
        uigp experiment --seed 3 --out runs/demo8

        # All four benchmark functions with a common offset draw
        uigp experiment --suite --shared-perturbation-seed 7 --out runs/suite
    """
    if suite and function_id:
        raise click.UsageError("--suite runs functions a-d; drop --function")

    if not suite:
        cfg = resolve_config(
            config_path, out_dir, function_id=function_id,
            seed=seed, shared_perturbation_seed=shared_perturbation_seed,
        )
        save_config(cfg, out_dir)
        click.echo(f"Running '{cfg.function_id}' (seed {cfg.seed}) -> {out_dir}")
        error_report = run_experiment(cfg, out_dir, n_jobs=threads)
        echo_report(error_report, surrogate_mspe(out_dir, cfg))
        return

    rows = []
    for fid in SUITE_FUNCTIONS:
        run_dir = out_dir / fid
        cfg = resolve_config(
            config_path, run_dir, function_id=fid,
            seed=seed, shared_perturbation_seed=shared_perturbation_seed,
        )
        save_config(cfg, run_dir)
        click.echo(f"Running '{fid}' (seed {cfg.seed}) -> {run_dir}")
        rows.append((fid, run_experiment(cfg, run_dir, n_jobs=threads), surrogate_mspe(run_dir, cfg)))

    click.echo("")
    click.echo(
        f"{'fn':<4}{'MSE prior':>12}{'MSE post':>12}{'red.':>8}"
        f"{'MSPE prior':>12}{'MSPE post':>12}{'red.':>8}{'MSPE std. GP':>14}"
    )
    click.echo("-" * 82)
    for fid, r, baseline in rows:
        click.echo(
            f"{fid:<4}{r.input_mse_prior:>12.3g}{r.input_mse_posterior:>12.3g}{r.relative_reduction_inputs:>7.1f}%"
            f"{r.mspe_prior:>12.3g}{r.mspe_posterior:>12.3g}{r.relative_reduction_mspe:>7.1f}%{baseline:>14.3g}"
        )

"""Shared options and helpers for CLI commands."""

import functools
import logging
import sys
from pathlib import Path

import click

from ..analysis import ErrorReport
from ..exceptions import StageError, UIGPError


def configure_logging(verbose: bool) -> None:
    """Send library log records to stderr; DEBUG when verbose, WARNING otherwise."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
    )
    logging.getLogger('uigp').setLevel(logging.DEBUG if verbose else logging.WARNING)


def common_options(command):
    """Add the --config, --seed, --out and --threads flags shared by every subcommand."""
    options = [
        click.option('--config', 'config_path', type=click.Path(dir_okay=False, path_type=Path),
                     help='Config file (.json or .toml); defaults to <out>/config.toml if present'),
        click.option('--seed', type=int, help='Master seed (overrides the config)'),
        click.option('--out', 'out_dir', type=click.Path(file_okay=False, path_type=Path),
                     default=Path('out'), show_default=True, help='Artifact directory'),
        click.option('--threads', type=click.IntRange(min=1), default=1, show_default=True,
                     help='Worker threads; 1 gives bitwise-reproducible output'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def handle_errors(command):
    """Report library errors as 'Error: ...' and exit with status 1."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except StageError as e:
            click.echo(f"Error: {e.message}")
            click.echo(f"Stage '{e.stage}' marked failed in MANIFEST.")
            sys.exit(1)
        except (UIGPError, FileNotFoundError) as e:
            click.echo(f"Error: {e}")
            sys.exit(1)
    return wrapper


def echo_report(report: ErrorReport, surrogate_mspe: float = None) -> None:
    """Print an ErrorReport as a prior/posterior table."""
    click.echo(f"{'':<16}{'prior':>14}{'posterior':>14}{'reduction':>12}")
    click.echo("-" * 56)
    click.echo(
        f"{'input MSE':<16}{report.input_mse_prior:>14.4g}{report.input_mse_posterior:>14.4g}"
        f"{report.relative_reduction_inputs:>11.1f}%"
    )
    click.echo(
        f"{'MSPE':<16}{report.mspe_prior:>14.4g}{report.mspe_posterior:>14.4g}"
        f"{report.relative_reduction_mspe:>11.1f}%"
    )
    if surrogate_mspe is not None:
        click.echo(f"{'MSPE (std. GP)':<16}{surrogate_mspe:>14.4g}")

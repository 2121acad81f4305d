"""uigp Command-Line Interface.

A Click-based CLI running the uncertain-input GP experiments stage by stage
or end to end. Every subcommand takes --config, --seed, --out and --threads.

Commands:
    uigp generate     - Generate a synthetic dataset
    uigp fit          - Fit kernel hyperparameters
    uigp sample       - Sample the posterior over uncertain inputs
    uigp predict      - Marginalized and standard-GP predictions, KDE tables
    uigp report       - Error report against the ground truth
    uigp experiment   - Run all stages (or the a-d suite with --suite)
"""

import click

from .experiment_cmd import experiment
from .stage_cmd import fit, generate, predict, report, sample
from .utils import configure_logging


@click.group()
@click.version_option(package_name="uigp")
@click.option('--verbose', '-v', is_flag=True, help='Log debug messages from the library')
def main(verbose: bool):
    """uigp - Gaussian process regression with uncertain inputs.

    Infer uncertain input locations by MCMC and marginalize them into the
    GP prediction.
    """
    configure_logging(verbose)


# Register commands
main.add_command(generate)
main.add_command(fit)
main.add_command(sample)
main.add_command(predict)
main.add_command(report)
main.add_command(experiment)


if __name__ == "__main__":
    main()

"""End-to-end experiment pipeline.

Stages run in order and each writes its artifacts before the next starts:

    generate  -> dataset.csv
    fit       -> hyperparams.json
    sample    -> chain.csv
    predict   -> prediction_{prior,posterior,surrogate}.csv, kde_u<i>_<j>.csv
    analyze   -> report.json

A MANIFEST file in the output directory records every stage's status and
artifacts, and is rewritten after each stage so that partial runs are
marked incomplete.

Example:
    >>> cfg = ExperimentConfig.preset('demo8', seed=3)
    >>> report = run_experiment(cfg, Path('runs/demo8'))
    >>> report.relative_reduction_mspe
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import norm

from . import artifacts
from .analysis import ErrorReport, build_error_report, kde_density, mspe
from .exceptions import DegenerateBandwidthError, StageError
from .experiments import ExperimentConfig, GeneratedDataset, evaluation_grid, generate_dataset, random_streams
from .gp import TrainingData, optimize_hyperparameters
from .kernel import KernelHyperparams
from .mcmc import PosteriorChain, chain_diagnostics, sample_posterior
from .prediction import PredictiveSummary, marginal_predict, prior_marginal_predict, surrogate_predict

logger = logging.getLogger(__name__)

MANIFEST_FILE = 'MANIFEST'
STAGES = ('generate', 'fit', 'sample', 'predict', 'analyze')

# Bandwidth, as a fraction of the prior std, for KDE of a chain that never moved.
_STUCK_KDE_BANDWIDTH = 0.05


@dataclass
class ManifestEntry:
    """Status of one pipeline stage.

    Attributes:
        stage: Stage tag
        status: 'done' or 'failed'
        artifacts: File names written by the stage
    """
    stage: str
    status: str
    artifacts: list[str] = field(default_factory=list)


@dataclass
class Manifest:
    """Stage status of an output directory."""
    entries: list[ManifestEntry] = field(default_factory=list)

    def record(self, stage: str, status: str, produced: list[str] = None) -> None:
        """Record a stage outcome, replacing any earlier entry for that stage."""
        self.entries = [e for e in self.entries if e.stage != stage]
        self.entries.append(ManifestEntry(stage, status, list(produced or [])))
        self.entries.sort(key=lambda e: STAGES.index(e.stage))

    def status(self, stage: str) -> str | None:
        for entry in self.entries:
            if entry.stage == stage:
                return entry.status
        return None

    @property
    def complete(self) -> bool:
        """True when every stage has finished successfully."""
        return all(self.status(stage) == 'done' for stage in STAGES)

    def save(self, out_dir: Path) -> Path:
        lines = [f"complete: {'yes' if self.complete else 'no'}"]
        for entry in self.entries:
            lines.append(f"{entry.stage}\t{entry.status}\t{','.join(entry.artifacts) or '-'}")
        path = Path(out_dir) / MANIFEST_FILE
        path.write_text('\n'.join(lines) + '\n')
        return path

    @classmethod
    def load(cls, out_dir: Path) -> "Manifest":
        """Load the MANIFEST of ``out_dir``; an empty manifest if there is none."""
        path = Path(out_dir) / MANIFEST_FILE
        manifest = cls()
        if not path.exists():
            return manifest
        for line in path.read_text().splitlines()[1:]:
            stage, status, produced = line.split('\t')
            manifest.record(stage, status, [] if produced == '-' else produced.split(','))
        return manifest


@dataclass(frozen=True)
class Predictions:
    """The three predictive summaries of one experiment."""
    prior: PredictiveSummary
    posterior: PredictiveSummary
    surrogate: PredictiveSummary


def run_stage(manifest: Manifest, out_dir: Path, stage: str, fn: Callable, *args, **kwargs):
    """Run one stage, recording its outcome in the manifest.

    ``fn`` returns ``(result, artifact names)``.

    Raises:
        StageError: Wrapping whatever ``fn`` raised
    """
    try:
        result, produced = fn(*args, **kwargs)
    except Exception as e:
        manifest.record(stage, 'failed')
        manifest.save(out_dir)
        raise StageError(f"Stage '{stage}' failed: {e}", stage=stage) from e
    manifest.record(stage, 'done', produced)
    manifest.save(out_dir)
    return result


def stage_generate(cfg: ExperimentConfig, out_dir: Path) -> tuple[GeneratedDataset, list[str]]:
    dataset = generate_dataset(cfg)
    artifacts.write_dataset(Path(out_dir) / artifacts.DATASET_FILE, dataset)
    logger.info("generated %d fixed and %d uncertain points (noise std %.4g)",
                dataset.data.n_fixed, dataset.data.n_uncertain, dataset.noise_std)
    return dataset, [artifacts.DATASET_FILE]


def stage_fit(data: TrainingData, cfg: ExperimentConfig, out_dir: Path, n_jobs: int = 1) -> tuple[KernelHyperparams, list[str]]:
    streams = random_streams(cfg.seed)
    hp = optimize_hyperparameters(
        data, restarts=cfg.restarts, seed=streams['optimizer'], n_jobs=n_jobs, noise_variance=cfg.noise_variance,
    )
    artifacts.write_hyperparams(Path(out_dir) / artifacts.HYPERPARAMS_FILE, hp)
    return hp, [artifacts.HYPERPARAMS_FILE]


def stage_sample(
    data: TrainingData,
    hp: KernelHyperparams,
    cfg: ExperimentConfig,
    out_dir: Path,
    n_jobs: int = 1,
) -> tuple[PosteriorChain, list[str]]:
    streams = random_streams(cfg.seed)
    mcmc_cfg = dataclasses.replace(cfg.mcmc, seed=streams['mcmc'])
    chain = sample_posterior(data, hp, mcmc_cfg, n_jobs=n_jobs)
    if data.n_uncertain:
        diagnostics = chain_diagnostics(chain)
        logger.info("acceptance %.3f, min ESS %.1f", diagnostics.acceptance_rate, diagnostics.ess.min())
    artifacts.write_chain(Path(out_dir) / artifacts.CHAIN_FILE, chain)
    return chain, [artifacts.CHAIN_FILE]


def compute_predictions(
    data: TrainingData,
    hp: KernelHyperparams,
    samples: np.ndarray,
    cfg: ExperimentConfig,
    n_jobs: int = 1,
) -> Predictions:
    """Prior-, posterior- and surrogate-based predictions on the test grid."""
    streams = random_streams(cfg.seed)
    test_inputs, _ = evaluation_grid(cfg)
    posterior = marginal_predict(
        samples, data, hp, test_inputs, n_jobs=n_jobs, max_samples=cfg.max_prediction_samples,
    )
    prior = prior_marginal_predict(
        data.input_prior, cfg.prior_samples, data, hp, test_inputs,
        seed=streams['prior_predict'], n_jobs=n_jobs,
    )
    surrogate = surrogate_predict(data, hp, test_inputs)
    return Predictions(prior=prior, posterior=posterior, surrogate=surrogate)


def write_kde_tables(data: TrainingData, samples: np.ndarray, out_dir: Path, points: int = 512) -> list[str]:
    """Prior and posterior marginal densities of every uncertain coordinate.

    Each table spans μ ± 4s of its coordinate's prior.
    """
    prior = data.input_prior
    produced = []
    for i in range(prior.n_points):
        for j in range(prior.shape[1]):
            mu, s = prior.means[i, j], prior.std_devs[i, j]
            grid = np.linspace(mu - 4 * s, mu + 4 * s, points)
            try:
                posterior_density = kde_density(samples[:, i, j], grid)
            except DegenerateBandwidthError:
                logger.warning("posterior samples of u%d_%d are all equal; using a fixed KDE bandwidth", i, j)
                posterior_density = kde_density(samples[:, i, j], grid, bandwidth=_STUCK_KDE_BANDWIDTH * s)
            name = artifacts.kde_file(i, j)
            artifacts.write_kde(Path(out_dir) / name, grid, norm.pdf(grid, mu, s), posterior_density)
            produced.append(name)
    return produced


def stage_predict(
    data: TrainingData,
    hp: KernelHyperparams,
    samples: np.ndarray,
    cfg: ExperimentConfig,
    out_dir: Path,
    n_jobs: int = 1,
) -> tuple[Predictions, list[str]]:
    predictions = compute_predictions(data, hp, samples, cfg, n_jobs=n_jobs)
    produced = []
    for source in ('prior', 'posterior', 'surrogate'):
        name = artifacts.prediction_file(source)
        artifacts.write_prediction(Path(out_dir) / name, getattr(predictions, source))
        produced.append(name)
    produced += write_kde_tables(data, samples, out_dir, points=cfg.kde_points)
    return predictions, produced


def stage_analyze(
    data: TrainingData,
    truth_locations: np.ndarray,
    samples: np.ndarray,
    predictions: Predictions,
    cfg: ExperimentConfig,
    out_dir: Path,
) -> tuple[ErrorReport, list[str]]:
    _, test_truth = evaluation_grid(cfg)
    report = build_error_report(
        data.input_prior, samples, truth_locations, predictions.prior, predictions.posterior, test_truth,
    )
    artifacts.write_report(Path(out_dir) / artifacts.REPORT_FILE, report)
    logger.info("MSPE prior %.4g -> posterior %.4g (surrogate %.4g)",
                report.mspe_prior, report.mspe_posterior, mspe(predictions.surrogate, test_truth))
    return report, [artifacts.REPORT_FILE]


def surrogate_mspe(out_dir: Path, cfg: ExperimentConfig) -> float:
    """MSPE of the standard-GP baseline, read back from its prediction CSV.

    The surrogate is a single fit, so its marginal moments are its per-sample moments.
    """
    columns = artifacts.read_prediction(Path(out_dir) / artifacts.prediction_file('surrogate'))
    _, test_truth = evaluation_grid(cfg)
    return float(np.mean((columns['marginal_mean'] - test_truth) ** 2 + columns['marginal_variance']))


def run_experiment(cfg: ExperimentConfig, out_dir: Path, n_jobs: int = 1) -> ErrorReport:
    """Generate data, fit, sample, predict and analyze one experiment.

    Args:
        cfg: Experiment configuration
        out_dir: Directory for all artifacts (created if missing)
        n_jobs: Threads for optimizer restarts, chains and per-sample fits;
            1 gives bitwise-reproducible artifacts

    Returns:
        The experiment's ErrorReport

    Raises:
        StageError: If any stage fails; the MANIFEST marks the run incomplete
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest()

    dataset = run_stage(manifest, out_dir, 'generate', stage_generate, cfg, out_dir)
    data = dataset.data
    hp = run_stage(manifest, out_dir, 'fit', stage_fit, data, cfg, out_dir, n_jobs=n_jobs)
    chain = run_stage(manifest, out_dir, 'sample', stage_sample, data, hp, cfg, out_dir, n_jobs=n_jobs)
    predictions = run_stage(
        manifest, out_dir, 'predict', stage_predict, data, hp, chain.samples, cfg, out_dir, n_jobs=n_jobs,
    )
    return run_stage(
        manifest, out_dir, 'analyze', stage_analyze,
        data, dataset.truth_locations, chain.samples, predictions, cfg, out_dir,
    )

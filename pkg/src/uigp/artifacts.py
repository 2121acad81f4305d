"""Readers and writers for the files exchanged between pipeline stages.

Files:
    dataset.csv            role, x_j..., y, prior_mean_j..., prior_std_j...
    hyperparams.json       signal_variance, lengthscales, noise_variance
    chain.csv              sample_index, log_posterior, x_u_{i}_{j}...
    prediction_<src>.csv   x*, marginal_mean, marginal_variance, band_lo, band_hi
    kde_u<i>_<j>.csv       grid, prior_density, posterior_density
    report.json            the six ErrorReport fields

Floats are written with ``repr`` so that files round-trip exactly and are
byte-identical across runs with the same inputs.
"""

import csv
import json
import re
from pathlib import Path

import numpy as np

from .analysis import ErrorReport
from .exceptions import InvalidArgumentError
from .experiments import GeneratedDataset
from .gp import TrainingData
from .kernel import KernelHyperparams
from .mcmc import PosteriorChain
from .prediction import PredictiveSummary
from .prior import InputPrior

DATASET_FILE = 'dataset.csv'
HYPERPARAMS_FILE = 'hyperparams.json'
CHAIN_FILE = 'chain.csv'
REPORT_FILE = 'report.json'

_CHAIN_COLUMN = re.compile(r'^x_u_(\d+)_(\d+)$')


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_rows(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _read_rows(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Artifact not found: {path}")
    with open(path, newline='') as f:
        reader = csv.DictReader(f)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def prediction_file(source: str) -> str:
    """File name of a prediction CSV (``prior``, ``posterior`` or ``surrogate``)."""
    return f"prediction_{source}.csv"


def kde_file(i: int, j: int) -> str:
    """File name of the KDE table for uncertain point ``i``, coordinate ``j``."""
    return f"kde_u{i}_{j}.csv"


def write_dataset(path: Path, dataset: GeneratedDataset) -> Path:
    """Write fixed and uncertain rows; uncertain rows carry their true location in x."""
    data = dataset.data
    d = data.dim
    header = ['role', *[f'x_{j}' for j in range(d)], 'y',
              *[f'prior_mean_{j}' for j in range(d)], *[f'prior_std_{j}' for j in range(d)]]
    rows = []
    for x, y in zip(data.fixed_inputs, data.fixed_outputs):
        rows.append(['fixed', *map(_fmt, x), _fmt(y), *[''] * (2 * d)])
    prior = data.input_prior
    for x, y, mu, s in zip(dataset.truth_locations, data.uncertain_outputs, prior.means, prior.std_devs):
        rows.append(['uncertain', *map(_fmt, x), _fmt(y), *map(_fmt, mu), *map(_fmt, s)])
    return _write_rows(path, header, rows)


def read_dataset(path: Path) -> tuple[TrainingData, np.ndarray]:
    """Read a dataset CSV.

    Returns:
        (training data, true uncertain locations)
    """
    header, rows = _read_rows(path)
    d = sum(1 for name in header if name.startswith('x_'))
    if d == 0:
        raise InvalidArgumentError(f"{path} has no x_ columns", argument='path', value=str(path))

    def vector(row, prefix):
        return [float(row[f'{prefix}_{j}']) for j in range(d)]

    fixed = [r for r in rows if r['role'] == 'fixed']
    uncertain = [r for r in rows if r['role'] == 'uncertain']
    unknown = {r['role'] for r in rows} - {'fixed', 'uncertain'}
    if unknown:
        raise InvalidArgumentError(f"Unknown role(s) in {path}: {sorted(unknown)}", argument='role')

    prior = InputPrior(
        means=np.array([vector(r, 'prior_mean') for r in uncertain]).reshape(-1, d),
        std_devs=np.array([vector(r, 'prior_std') for r in uncertain]).reshape(-1, d),
    )
    data = TrainingData(
        fixed_inputs=np.array([vector(r, 'x') for r in fixed]).reshape(-1, d),
        fixed_outputs=[float(r['y']) for r in fixed],
        uncertain_outputs=[float(r['y']) for r in uncertain],
        input_prior=prior,
    )
    truth = np.array([vector(r, 'x') for r in uncertain]).reshape(-1, d)
    return data, truth


def write_hyperparams(path: Path, hp: KernelHyperparams) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        'signal_variance': hp.signal_variance,
        'lengthscales': list(hp.lengthscales),
        'noise_variance': hp.noise_variance,
    }
    path.write_text(json.dumps(payload, indent=2) + '\n')
    return path


def read_hyperparams(path: Path) -> KernelHyperparams:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Artifact not found: {path}")
    payload = json.loads(path.read_text())
    return KernelHyperparams(
        signal_variance=payload['signal_variance'],
        lengthscales=tuple(payload['lengthscales']),
        noise_variance=payload['noise_variance'],
    )


def write_chain(path: Path, chain: PosteriorChain) -> Path:
    """One row per retained sample, coordinates flattened in (i, j) order."""
    _, n_points, dim = chain.samples.shape
    header = ['sample_index', 'log_posterior',
              *[f'x_u_{i}_{j}' for i in range(n_points) for j in range(dim)]]
    rows = (
        [str(k), _fmt(lp), *map(_fmt, sample.reshape(-1))]
        for k, (sample, lp) in enumerate(zip(chain.samples, chain.log_posterior_values))
    )
    return _write_rows(path, header, rows)


def read_chain(path: Path, shape: tuple[int, int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Read a chain CSV.

    Args:
        path: Chain file
        shape: (N_u, d); inferred from the column names when omitted. Needed
            when N_u = 0 and the file has no coordinate columns.

    Returns:
        (S × N_u × d samples, S log-posterior values)
    """
    header, rows = _read_rows(path)
    columns = [name for name in header if _CHAIN_COLUMN.match(name)]
    if shape is None:
        if not columns:
            raise InvalidArgumentError(f"Cannot infer sample shape from {path}", argument='shape')
        indices = [tuple(map(int, _CHAIN_COLUMN.match(c).groups())) for c in columns]
        shape = (max(i for i, _ in indices) + 1, max(j for _, j in indices) + 1)
    samples = np.array([[float(r[c]) for c in columns] for r in rows]).reshape(len(rows), *shape)
    log_values = np.array([float(r['log_posterior']) for r in rows])
    return samples, log_values


def write_prediction(path: Path, summary: PredictiveSummary) -> Path:
    """Marginal moments with the ±2σ band."""
    d = summary.test_inputs.shape[1]
    x_columns = ['x*'] if d == 1 else [f'x*_{j}' for j in range(d)]
    band_lo, band_hi = summary.band
    rows = (
        [*map(_fmt, x), _fmt(m), _fmt(v), _fmt(lo), _fmt(hi)]
        for x, m, v, lo, hi in zip(
            summary.test_inputs, summary.marginal_mean, summary.marginal_variance, band_lo, band_hi,
        )
    )
    return _write_rows(path, [*x_columns, 'marginal_mean', 'marginal_variance', 'band_lo', 'band_hi'], rows)


def read_prediction(path: Path) -> dict[str, np.ndarray]:
    """Read a prediction CSV into named columns."""
    header, rows = _read_rows(path)
    return {name: np.array([float(r[name]) for r in rows]) for name in header}


def write_kde(path: Path, grid, prior_density, posterior_density) -> Path:
    rows = (
        [_fmt(g), _fmt(p), _fmt(q)] for g, p, q in zip(grid, prior_density, posterior_density)
    )
    return _write_rows(path, ['grid', 'prior_density', 'posterior_density'], rows)


def write_report(path: Path, report: ErrorReport) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2) + '\n')
    return path


def read_report(path: Path) -> ErrorReport:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Artifact not found: {path}")
    return ErrorReport(**json.loads(path.read_text()))

"""Exact Gaussian process regression.

Fitting, log-marginal likelihood and its gradient, multi-start
hyperparameter optimization on the prior-mean surrogate dataset, and the
standard predictive distribution. All linear algebra goes through one
Cholesky factor of the noise-augmented Gram matrix.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .exceptions import (
    IllConditionedKernelError,
    InvalidArgumentError,
    OptimizationFailedError,
)
from .kernel import KernelHyperparams, gram_gradients, gram_matrix, jitter_level
from .prior import InputPrior

logger = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)

# Smallest noise variance the optimizer may reach; the jitter handles conditioning below it.
NOISE_VARIANCE_FLOOR = 1e-10


@dataclass(frozen=True)
class TrainingData:
    """Fixed-input pairs plus uncertain-input observations with their prior.

    Attributes:
        fixed_inputs: N_f × d matrix X^f
        fixed_outputs: N_f vector y^f
        uncertain_outputs: N_u vector y^u
        input_prior: Prior over the N_u uncertain locations
    """
    fixed_inputs: np.ndarray
    fixed_outputs: np.ndarray
    uncertain_outputs: np.ndarray
    input_prior: InputPrior

    def __post_init__(self):
        d = self.input_prior.shape[1]
        fixed_inputs = np.asarray(self.fixed_inputs, dtype=float)
        if fixed_inputs.size == 0:
            fixed_inputs = fixed_inputs.reshape(0, d)
        elif fixed_inputs.ndim == 1:
            fixed_inputs = fixed_inputs[:, None]
        fixed_outputs = np.asarray(self.fixed_outputs, dtype=float).reshape(-1)
        uncertain_outputs = np.asarray(self.uncertain_outputs, dtype=float).reshape(-1)

        if fixed_inputs.ndim != 2 or fixed_inputs.shape[1] != d:
            raise InvalidArgumentError(
                f"fixed_inputs must have {d} columns to match the prior, got shape {fixed_inputs.shape}",
                argument='fixed_inputs', value=fixed_inputs.shape,
            )
        if fixed_outputs.shape[0] != fixed_inputs.shape[0]:
            raise InvalidArgumentError(
                f"{fixed_inputs.shape[0]} fixed inputs but {fixed_outputs.shape[0]} fixed outputs",
                argument='fixed_outputs', value=fixed_outputs.shape,
            )
        if uncertain_outputs.shape[0] != self.input_prior.n_points:
            raise InvalidArgumentError(
                f"{self.input_prior.n_points} uncertain priors but {uncertain_outputs.shape[0]} uncertain outputs",
                argument='uncertain_outputs', value=uncertain_outputs.shape,
            )
        if fixed_inputs.shape[0] + uncertain_outputs.shape[0] < 1:
            raise InvalidArgumentError("Training data must contain at least one point", argument='data')

        object.__setattr__(self, 'fixed_inputs', fixed_inputs)
        object.__setattr__(self, 'fixed_outputs', fixed_outputs)
        object.__setattr__(self, 'uncertain_outputs', uncertain_outputs)

    @property
    def n_fixed(self) -> int:
        return self.fixed_inputs.shape[0]

    @property
    def n_uncertain(self) -> int:
        return self.uncertain_outputs.shape[0]

    @property
    def dim(self) -> int:
        return self.fixed_inputs.shape[1]

    @property
    def outputs(self) -> np.ndarray:
        """Stacked [y^f; y^u]."""
        return np.concatenate([self.fixed_outputs, self.uncertain_outputs])

    def stack_inputs(self, uncertain_inputs) -> np.ndarray:
        """Stack [X^f; X^u] for one realization of the uncertain inputs."""
        uncertain_inputs = np.asarray(uncertain_inputs, dtype=float).reshape(self.input_prior.shape)
        return np.vstack([self.fixed_inputs, uncertain_inputs])

    def surrogate_inputs(self) -> np.ndarray:
        """Training inputs with every uncertain location replaced by its prior mean."""
        return self.stack_inputs(self.input_prior.means)


@dataclass(frozen=True)
class FittedGP:
    """A GP conditioned on one training set; immutable after construction.

    Attributes:
        training_inputs: n × d matrix
        training_outputs: n vector
        hyperparams: Frozen kernel hyperparameters
        cholesky_factor: Lower-triangular L with L Lᵀ = K + σ_n² I + jitter
        alpha: (K + σ_n² I + jitter)⁻¹ y
        jitter: Diagonal jitter used in the factorization
    """
    training_inputs: np.ndarray
    training_outputs: np.ndarray
    hyperparams: KernelHyperparams
    cholesky_factor: np.ndarray
    alpha: np.ndarray
    jitter: float


@dataclass(frozen=True)
class Prediction:
    """Pointwise predictive moments of the latent function.

    Attributes:
        mean: m vector of predictive means
        variance: m vector of predictive variances, clamped at 0
        clamped: Number of variances that were negative before clamping
    """
    mean: np.ndarray
    variance: np.ndarray
    clamped: int = 0


@dataclass(frozen=True)
class RestartResult:
    """Outcome of one optimizer restart.

    Attributes:
        index: Restart index (ties are broken towards the lowest index)
        initial: Starting log-hyperparameters
        initial_lml: LML at the start (``-inf`` if it could not be evaluated)
        theta: Final log-hyperparameters (None if the restart failed)
        lml: LML at ``theta`` (``-inf`` if the restart failed)
        message: Optimizer status or failure reason
    """
    index: int
    initial: np.ndarray
    initial_lml: float
    theta: np.ndarray | None
    lml: float
    message: str

    @property
    def succeeded(self) -> bool:
        return self.theta is not None and np.isfinite(self.lml)


def _check_training(inputs, outputs, hp: KernelHyperparams) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(inputs, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(outputs, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InvalidArgumentError(f"Expected a non-empty n × d input matrix, got shape {X.shape}", argument='inputs')
    if X.shape[0] != y.shape[0]:
        raise InvalidArgumentError(
            f"{X.shape[0]} inputs but {y.shape[0]} outputs",
            argument='outputs', value=y.shape,
        )
    if X.shape[1] != hp.dim:
        raise InvalidArgumentError(
            f"Inputs have {X.shape[1]} columns but the kernel has {hp.dim} lengthscales",
            argument='inputs', value=X.shape,
        )
    return X, y


def _factorize(X: np.ndarray, hp: KernelHyperparams) -> tuple[np.ndarray, float]:
    """Cholesky factor of the noise-augmented Gram matrix of ``X``."""
    jitter = jitter_level(hp)
    K = gram_matrix(X, X, hp, add_noise=True, jitter=jitter)
    try:
        L = cholesky(K, lower=True)
    except (LinAlgError, ValueError) as e:
        raise IllConditionedKernelError(
            f"Cholesky factorization of a {K.shape[0]}×{K.shape[0]} Gram matrix failed with jitter {jitter:.3g}",
            jitter=jitter, size=K.shape[0],
        ) from e
    return L, jitter


def _lml_terms(X: np.ndarray, y: np.ndarray, hp: KernelHyperparams) -> tuple[float, np.ndarray, np.ndarray]:
    L, _ = _factorize(X, hp)
    alpha = cho_solve((L, True), y)
    lml = -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * X.shape[0] * _LOG_2PI
    return float(lml), L, alpha


def log_marginal_likelihood(inputs, outputs, hp: KernelHyperparams) -> float:
    """Log-marginal likelihood log N(y; 0, K + σ_n² I).

    Args:
        inputs: n × d training inputs (n >= 1)
        outputs: n training outputs
        hp: Kernel hyperparameters

    Returns:
        -½ yᵀ(K+σ_n²I)⁻¹y - ½ log|K+σ_n²I| - (n/2) log 2π

    Raises:
        IllConditionedKernelError: If the Cholesky factorization fails
    """
    X, y = _check_training(inputs, outputs, hp)
    lml, _, _ = _lml_terms(X, y, hp)
    return lml


def _lml_and_gradient(X: np.ndarray, y: np.ndarray, hp: KernelHyperparams) -> tuple[float, np.ndarray]:
    lml, L, alpha = _lml_terms(X, y, hp)
    K_inv = cho_solve((L, True), np.eye(X.shape[0]))
    inner = np.outer(alpha, alpha) - K_inv
    grad = np.array([0.5 * np.sum(inner * dK) for dK in gram_gradients(X, hp)])
    return lml, grad


def lml_gradient(inputs, outputs, hp: KernelHyperparams) -> np.ndarray:
    """Gradient of :func:`log_marginal_likelihood` in log-hyperparameter space.

    Returns:
        d + 2 components ordered as ``(log σ_f², log ℓ_1..d, log σ_n²)``
    """
    X, y = _check_training(inputs, outputs, hp)
    _, grad = _lml_and_gradient(X, y, hp)
    return grad


def _search_space(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[tuple[float, float]]]:
    """Log-uniform initialization ranges and optimizer bounds."""
    var_y = float(np.var(y))
    if not var_y > 0:
        var_y = 1.0
    span = np.ptp(X, axis=0)
    span = np.where(span > 0, span, 1.0)

    low = np.log(np.concatenate([[1e-2 * var_y], 1e-2 * span, [1e-6 * var_y]]))
    high = np.log(np.concatenate([[1e2 * var_y], 1e1 * span, [var_y]]))
    bounds = [(np.log(1e-6 * var_y), np.log(1e6 * var_y))]
    bounds += [(np.log(1e-3 * s), np.log(1e3 * s)) for s in span]
    bounds += [(np.log(NOISE_VARIANCE_FLOOR), np.log(1e2 * var_y))]
    return low, high, bounds


def _run_restart(
    index: int,
    start: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    bounds: list[tuple[float, float]],
    max_iter: int,
    gtol: float,
) -> RestartResult:
    def objective(theta):
        lml, grad = _lml_and_gradient(X, y, KernelHyperparams.from_log_vector(theta))
        return -lml, -grad

    try:
        f0, _ = objective(start)
    except IllConditionedKernelError as e:
        return RestartResult(index, start, -np.inf, None, -np.inf, f"initial point: {e.message}")

    try:
        res = minimize(
            objective, start, jac=True, method='L-BFGS-B', bounds=bounds,
            options={'maxiter': max_iter, 'gtol': gtol, 'ftol': 1e-15},
        )
    except IllConditionedKernelError as e:
        return RestartResult(index, start, -f0, None, -np.inf, e.message)

    if not np.isfinite(res.fun) or res.fun > f0:
        # L-BFGS-B ended somewhere worse than where it began; keep the start
        return RestartResult(index, start, -f0, start.copy(), -f0, f"kept initial point ({res.message})")
    return RestartResult(index, start, -f0, np.asarray(res.x), -float(res.fun), str(res.message))


def fit_restarts(
    data: TrainingData,
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 200,
    gtol: float = 1e-6,
    n_jobs: int = 1,
    noise_variance: Optional[float] = None,
) -> list[RestartResult]:
    """Run every multi-start restart on the prior-mean surrogate dataset.

    Args:
        data: Training data; uncertain inputs are replaced by their prior means
        restarts: Number of log-uniform random starting points
        seed: Seed for the starting points
        max_iter: Iteration cap per restart
        gtol: Projected-gradient convergence tolerance
        n_jobs: Restarts run on this many threads
        noise_variance: Hold σ_n² at this value instead of optimizing it

    Returns:
        One :class:`RestartResult` per restart, in restart order

    Raises:
        InvalidArgumentError: If ``noise_variance`` is given and not positive
    """
    X = data.surrogate_inputs()
    y = data.outputs
    low, high, bounds = _search_space(X, y)
    if noise_variance is not None:
        if not noise_variance > 0:
            raise InvalidArgumentError(
                "noise_variance must be positive", argument='noise_variance', value=noise_variance,
            )
        low[-1] = high[-1] = np.log(noise_variance)
        bounds[-1] = (low[-1], high[-1])
    rng = np.random.default_rng(seed)
    starts = rng.uniform(low, high, size=(restarts, low.shape[0]))
    lo_bounds, hi_bounds = np.array(bounds).T
    starts = np.clip(starts, lo_bounds, hi_bounds)

    results = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_run_restart)(i, starts[i], X, y, bounds, max_iter, gtol)
        for i in range(restarts)
    )
    for r in results:
        logger.debug("restart %d: initial LML %.6g -> %.6g (%s)", r.index, r.initial_lml, r.lml, r.message)
    return list(results)


def optimize_hyperparameters(
    data: TrainingData,
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 200,
    gtol: float = 1e-6,
    n_jobs: int = 1,
    noise_variance: Optional[float] = None,
) -> KernelHyperparams:
    """Fit kernel hyperparameters once on the prior-mean surrogate dataset.

    The result stays frozen for sampling and prediction.

    Args:
        data: Training data
        restarts: Number of multi-start restarts
        seed: Seed for the starting points
        max_iter: Iteration cap per restart
        gtol: Projected-gradient convergence tolerance
        n_jobs: Restarts run on this many threads
        noise_variance: Hold σ_n² at this value instead of optimizing it

    Returns:
        Hyperparameters with the highest LML over all restarts

    Raises:
        OptimizationFailedError: If no restart produced a finite LML
        InvalidArgumentError: If ``noise_variance`` is given and not positive
    """
    results = fit_restarts(
        data, restarts=restarts, seed=seed, max_iter=max_iter, gtol=gtol, n_jobs=n_jobs,
        noise_variance=noise_variance,
    )

    best = None
    for r in results:
        if r.succeeded and (best is None or r.lml > best.lml):
            best = r
    if best is None:
        raise OptimizationFailedError(
            f"All {len(results)} optimizer restarts failed",
            diagnostics=[f"restart {r.index}: {r.message}" for r in results],
        )

    hp = KernelHyperparams.from_log_vector(best.theta)
    logger.info(
        "hyperparameters from restart %d: signal_variance=%.4g lengthscales=%s noise_variance=%.4g (LML %.6g)",
        best.index, hp.signal_variance, [round(ell, 6) for ell in hp.lengthscales], hp.noise_variance, best.lml,
    )
    return hp


def gp_fit(inputs, outputs, hp: KernelHyperparams) -> FittedGP:
    """Condition a GP on training data with fixed hyperparameters.

    Raises:
        IllConditionedKernelError: If the Cholesky factorization fails
    """
    X, y = _check_training(inputs, outputs, hp)
    L, jitter = _factorize(X, hp)
    alpha = cho_solve((L, True), y)
    return FittedGP(
        training_inputs=X,
        training_outputs=y,
        hyperparams=hp,
        cholesky_factor=L,
        alpha=alpha,
        jitter=jitter,
    )


def gp_predict(model: FittedGP, test_inputs) -> Prediction:
    """Predictive mean and variance of the noise-free latent function.

    Args:
        model: Fitted GP
        test_inputs: m × d test points

    Returns:
        Prediction with mean k(x*,X)α and variance k(x*,x*) - vᵀv, v = L⁻¹k(X,x*)
    """
    hp = model.hyperparams
    K_star = gram_matrix(model.training_inputs, test_inputs, hp)
    mean = K_star.T @ model.alpha
    v = solve_triangular(model.cholesky_factor, K_star, lower=True)
    variance = hp.signal_variance - np.sum(v * v, axis=0)

    negative = variance < 0
    clamped = int(np.count_nonzero(negative))
    if clamped:
        level = logging.WARNING if variance.min() < -1e-10 else logging.DEBUG
        logger.log(level, "clamped %d negative predictive variances (min %.3g)", clamped, variance.min())
        variance = np.where(negative, 0.0, variance)
    return Prediction(mean=mean, variance=variance, clamped=clamped)

"""Random-walk Metropolis sampling of the uncertain input locations.

The target is the unnormalized posterior: the input prior times the joint GP
likelihood of all outputs with the frozen hyperparameters. The evidence is
never evaluated.

Example:
    >>> hp = optimize_hyperparameters(data)
    >>> chain = sample_posterior(data, hp, MetropolisConfig(seed=7))
    >>> chain_diagnostics(chain).ess
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np
from joblib import Parallel, delayed

from .exceptions import ConfigError, IllConditionedKernelError, InvalidInitError
from .gp import TrainingData, log_marginal_likelihood
from .kernel import KernelHyperparams
from .prior import log_prior_density

logger = logging.getLogger(__name__)

LogTarget = Callable[[np.ndarray], float]

ADAPT_WINDOW = 100
ADAPT_ACCEPTANCE = (0.2, 0.5)
ADAPT_FACTORS = (0.9, 1.1)
STUCK_LIMIT = 1000
MIN_RETAINED = 100


@dataclass(frozen=True)
class MetropolisConfig:
    """Sampler settings.

    Attributes:
        iterations: Total Metropolis steps per chain
        burn_in: Leading steps discarded (and used for step-size adaptation)
        thinning: Keep every ``thinning``-th post-burn-in state
        step_scale: Proposal std as a multiple of the prior std-devs
        adapt_during_burn_in: Tune ``step_scale`` towards 20-50% acceptance during burn-in
        seed: Master seed of the sampler
        chains: Number of independent chains, pooled in chain order
    """
    iterations: int = 20_000
    burn_in: int = 5_000
    thinning: int = 15
    step_scale: float = 0.25
    adapt_during_burn_in: bool = True
    seed: int = 0
    chains: int = 1

    def __post_init__(self):
        if self.iterations <= 0:
            raise ConfigError("iterations must be positive", field='iterations', value=self.iterations)
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError("burn_in must lie in [0, iterations)", field='burn_in', value=self.burn_in)
        if self.thinning < 1:
            raise ConfigError("thinning must be at least 1", field='thinning', value=self.thinning)
        if not self.step_scale > 0:
            raise ConfigError("step_scale must be positive", field='step_scale', value=self.step_scale)
        if self.chains < 1:
            raise ConfigError("chains must be at least 1", field='chains', value=self.chains)
        if self.retained < 1:
            raise ConfigError(
                "iterations - burn_in must be at least thinning to retain a sample",
                field='thinning', value=self.thinning,
            )
        if self.retained < MIN_RETAINED:
            logger.warning(
                "only %d samples retained per chain ((iterations - burn_in) / thinning); "
                "production runs should keep at least %d", self.retained, MIN_RETAINED,
            )

    @property
    def retained(self) -> int:
        """Samples kept per chain."""
        return (self.iterations - self.burn_in) // self.thinning


@dataclass(frozen=True)
class PosteriorChain:
    """Retained draws of X^u.

    Attributes:
        samples: S × N_u × d array of retained draws (post burn-in, thinned)
        log_posterior_values: Log-target at each retained draw
        acceptance_rate: Accepted / proposed over post-burn-in steps
        config: Sampler settings that produced the chain
        accepted: Accepted post-burn-in proposals
        proposed: Post-burn-in proposals
        step_scales: Final (adapted) step scale of each chain
        warnings: Sampler warnings, e.g. stuck chains
    """
    samples: np.ndarray
    log_posterior_values: np.ndarray
    acceptance_rate: float
    config: MetropolisConfig
    accepted: int = 0
    proposed: int = 0
    step_scales: tuple[float, ...] = ()
    warnings: tuple[str, ...] = field(default=())

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class ChainDiagnostics:
    """Summary statistics of a chain.

    Attributes:
        acceptance_rate: Post-burn-in acceptance rate
        mean: N_u × d posterior means
        std: N_u × d posterior standard deviations
        ess: N_u × d effective sample sizes
    """
    acceptance_rate: float
    mean: np.ndarray
    std: np.ndarray
    ess: np.ndarray


def log_unnormalized_posterior(candidate, data: TrainingData, hp: KernelHyperparams) -> float:
    """Log prior of the candidate plus the joint GP log-likelihood of all outputs.

    Args:
        candidate: N_u × d configuration of the uncertain inputs
        data: Training data (the prior is ``data.input_prior``)
        hp: Frozen hyperparameters

    Raises:
        IllConditionedKernelError: If the stacked Gram matrix cannot be factorized
    """
    candidate = np.asarray(candidate, dtype=float).reshape(data.input_prior.shape)
    log_prior = log_prior_density(candidate, data.input_prior)
    log_likelihood = log_marginal_likelihood(data.stack_inputs(candidate), data.outputs, hp)
    return log_prior + log_likelihood


def posterior_target(data: TrainingData, hp: KernelHyperparams) -> LogTarget:
    """Bind data and hyperparameters into a log-target for the sampler."""
    return partial(log_unnormalized_posterior, data=data, hp=hp)


def accept_proposal(log_ratio: float, u: float) -> bool:
    """Metropolis rule: accept with probability min(1, exp(log_ratio)).

    Args:
        log_ratio: log target(proposal) - log target(current)
        u: Uniform(0, 1) draw
    """
    if log_ratio >= 0:
        return True
    return u > 0 and np.log(u) < log_ratio


def _safe_log_target(target: LogTarget, x: np.ndarray) -> float:
    # Collapsed inputs in noise-free problems break the factorization; treat as zero density
    try:
        value = float(target(x))
    except IllConditionedKernelError:
        return -np.inf
    return value if np.isfinite(value) else -np.inf


def run_metropolis(
    target: LogTarget,
    init,
    cfg: MetropolisConfig,
    scales=None,
    rng: Optional[np.random.Generator] = None,
) -> PosteriorChain:
    """Run one random-walk Metropolis chain.

    Proposals are x + step · scales ⊙ z with z standard normal, where step
    starts at ``cfg.step_scale``. During burn-in the step is multiplied by
    0.9 or 1.1 every 100 steps when the window's acceptance rate falls
    outside [0.2, 0.5]; it is frozen afterwards.

    Args:
        target: Log-density up to a constant
        init: Starting state
        cfg: Sampler settings
        scales: Per-coordinate proposal scale, same shape as ``init`` (default: ones)
        rng: Random stream (default: ``default_rng(cfg.seed)``)

    Returns:
        PosteriorChain with ``cfg.retained`` samples

    Raises:
        InvalidInitError: If the target is not finite at ``init``
    """
    current = np.array(init, dtype=float)
    shape = current.shape
    scales = np.ones(shape) if scales is None else np.broadcast_to(np.asarray(scales, dtype=float), shape)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng

    try:
        current_lp = float(target(current))
    except IllConditionedKernelError as e:
        raise InvalidInitError(f"Log-target could not be evaluated at the initial state: {e.message}") from e
    if not np.isfinite(current_lp):
        raise InvalidInitError(f"Log-target is not finite at the initial state ({current_lp})", value=current_lp)

    step = cfg.step_scale
    samples = np.empty((cfg.retained, *shape))
    log_values = np.empty(cfg.retained)
    window_accepted = 0
    accepted = proposed = 0
    rejection_run = 0
    stuck = False

    for t in range(cfg.iterations):
        proposal = current + step * scales * rng.standard_normal(shape)
        proposal_lp = _safe_log_target(target, proposal)
        u = rng.random()
        ok = accept_proposal(proposal_lp - current_lp, u)
        if ok:
            current, current_lp = proposal, proposal_lp

        if t < cfg.burn_in:
            window_accepted += ok
            if cfg.adapt_during_burn_in and (t + 1) % ADAPT_WINDOW == 0:
                rate = window_accepted / ADAPT_WINDOW
                if rate < ADAPT_ACCEPTANCE[0]:
                    step *= ADAPT_FACTORS[0]
                elif rate > ADAPT_ACCEPTANCE[1]:
                    step *= ADAPT_FACTORS[1]
                window_accepted = 0
            continue

        proposed += 1
        accepted += ok
        rejection_run = 0 if ok else rejection_run + 1
        if rejection_run >= STUCK_LIMIT:
            stuck = True

        k = t - cfg.burn_in + 1
        if k % cfg.thinning == 0:
            samples[k // cfg.thinning - 1] = current
            log_values[k // cfg.thinning - 1] = current_lp

    acceptance_rate = accepted / proposed if proposed else 0.0
    warnings = ()
    if stuck:
        message = f"chain rejected every proposal for {STUCK_LIMIT} consecutive post-burn-in steps"
        logger.warning(message)
        warnings = (message,)
    logger.info("chain finished: acceptance %.3f, step scale %.4g, %d samples", acceptance_rate, step, cfg.retained)

    return PosteriorChain(
        samples=samples,
        log_posterior_values=log_values,
        acceptance_rate=acceptance_rate,
        config=cfg,
        accepted=accepted,
        proposed=proposed,
        step_scales=(step,),
        warnings=warnings,
    )


def run_chains(
    target: LogTarget,
    init,
    cfg: MetropolisConfig,
    scales=None,
    n_jobs: int = 1,
) -> PosteriorChain:
    """Run ``cfg.chains`` independent chains and pool their retained samples.

    Chain c draws from the c-th child of ``SeedSequence(cfg.seed)``; a single
    chain uses ``default_rng(cfg.seed)`` directly. Pooling follows chain order.
    """
    if cfg.chains == 1:
        return run_metropolis(target, init, cfg, scales)

    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.chains)]
    chains = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(run_metropolis)(target, init, cfg, scales, rng) for rng in streams
    )
    accepted = sum(c.accepted for c in chains)
    proposed = sum(c.proposed for c in chains)
    return PosteriorChain(
        samples=np.concatenate([c.samples for c in chains]),
        log_posterior_values=np.concatenate([c.log_posterior_values for c in chains]),
        acceptance_rate=accepted / proposed if proposed else 0.0,
        config=cfg,
        accepted=accepted,
        proposed=proposed,
        step_scales=tuple(s for c in chains for s in c.step_scales),
        warnings=tuple(f"chain {i}: {w}" for i, c in enumerate(chains) for w in c.warnings),
    )


def sample_posterior(
    data: TrainingData,
    hp: KernelHyperparams,
    cfg: MetropolisConfig,
    n_jobs: int = 1,
) -> PosteriorChain:
    """Sample the posterior over the uncertain inputs of ``data``.

    Chains start at the prior means with proposal scales proportional to the
    prior std-devs. Without uncertain inputs there is nothing to sample and
    the chain holds a single empty configuration.
    """
    prior = data.input_prior
    if data.n_uncertain == 0:
        value = log_marginal_likelihood(data.fixed_inputs, data.fixed_outputs, hp)
        return PosteriorChain(
            samples=np.empty((1, *prior.shape)),
            log_posterior_values=np.array([value]),
            acceptance_rate=0.0,
            config=cfg,
        )
    return run_chains(posterior_target(data, hp), prior.means, cfg, scales=prior.std_devs, n_jobs=n_jobs)


def effective_sample_size(x) -> float:
    """ESS of a scalar trace by Geyer's initial positive sequence.

    Autocorrelations come from an FFT autocovariance; pairs ρ_2k + ρ_2k+1 are
    summed until the first negative pair. A constant trace has ESS 1.

    Returns:
        ESS clipped to [1, n]
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    n = x.shape[0]
    if n < 2:
        return float(n)
    if np.ptp(x) == 0:
        return 1.0

    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, n=size)
    acov = np.fft.irfft(spectrum * np.conjugate(spectrum), n=size)[:n] / n
    rho = acov / acov[0]

    tau = -1.0
    t = 0
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair < 0:
            break
        tau += 2.0 * pair
        t += 2

    if tau <= 0:
        return float(n)
    return float(np.clip(n / tau, 1.0, n))


def chain_diagnostics(chain: PosteriorChain) -> ChainDiagnostics:
    """Acceptance rate, per-coordinate mean/std, and ESS of a chain."""
    samples = chain.samples
    n_samples, n_points, dim = samples.shape
    ess = np.empty((n_points, dim))
    for i in range(n_points):
        for j in range(dim):
            ess[i, j] = effective_sample_size(samples[:, i, j])
    return ChainDiagnostics(
        acceptance_rate=float(chain.acceptance_rate),
        mean=samples.mean(axis=0),
        std=samples.std(axis=0),
        ess=ess,
    )

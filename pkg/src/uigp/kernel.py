"""Squared-exponential ARD covariance and Gram-matrix assembly.

Every likelihood and prediction in uigp goes through :func:`gram_matrix`.
Hyperparameters are optimized in log-space, so :class:`KernelHyperparams`
converts to and from the log-vector ``(log σ_f², log ℓ_1..d, log σ_n²)``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import InvalidArgumentError

# Relative diagonal jitter added to every square Gram matrix that is factorized.
JITTER_SCALE = 1e-8


@dataclass(frozen=True)
class KernelHyperparams:
    """Hyperparameters of the SE-ARD kernel plus Gaussian noise.

    Attributes:
        signal_variance: σ_f², output units squared (> 0)
        lengthscales: One lengthscale per input dimension (each > 0)
        noise_variance: σ_n², output units squared (>= 0)
    """
    signal_variance: float
    lengthscales: tuple[float, ...]
    noise_variance: float

    def __post_init__(self):
        lengthscales = tuple(float(ell) for ell in np.atleast_1d(self.lengthscales))
        object.__setattr__(self, 'lengthscales', lengthscales)
        object.__setattr__(self, 'signal_variance', float(self.signal_variance))
        object.__setattr__(self, 'noise_variance', float(self.noise_variance))

        if not lengthscales:
            raise InvalidArgumentError("At least one lengthscale is required", argument='lengthscales')
        if not self.signal_variance > 0:
            raise InvalidArgumentError(
                f"signal_variance must be positive, got {self.signal_variance}",
                argument='signal_variance', value=self.signal_variance,
            )
        if not all(ell > 0 for ell in lengthscales):
            raise InvalidArgumentError(
                f"Every lengthscale must be positive, got {lengthscales}",
                argument='lengthscales', value=lengthscales,
            )
        if not self.noise_variance >= 0:
            raise InvalidArgumentError(
                f"noise_variance must be nonnegative, got {self.noise_variance}",
                argument='noise_variance', value=self.noise_variance,
            )

    @property
    def dim(self) -> int:
        """Input dimension d."""
        return len(self.lengthscales)

    def to_log_vector(self) -> np.ndarray:
        """Pack into ``(log σ_f², log ℓ_1..d, log σ_n²)``.

        A zero noise variance maps to ``-inf``.
        """
        with np.errstate(divide='ignore'):
            return np.log(np.array([self.signal_variance, *self.lengthscales, self.noise_variance]))

    @classmethod
    def from_log_vector(cls, theta: np.ndarray) -> "KernelHyperparams":
        """Inverse of :meth:`to_log_vector`."""
        values = np.exp(np.asarray(theta, dtype=float))
        return cls(
            signal_variance=values[0],
            lengthscales=tuple(values[1:-1]),
            noise_variance=values[-1],
        )


def _as_inputs(points, name: str) -> np.ndarray:
    """Coerce an input set to a 2-D float array (rows are points)."""
    array = np.asarray(points, dtype=float)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise InvalidArgumentError(
            f"{name} must be a 2-D array of points, got shape {array.shape}",
            argument=name, value=array.shape,
        )
    return array


def _check_dim(points: np.ndarray, hp: KernelHyperparams, name: str) -> None:
    if points.shape[1] != hp.dim:
        raise InvalidArgumentError(
            f"{name} has {points.shape[1]} columns but the kernel has {hp.dim} lengthscales",
            argument=name, value=points.shape,
        )


def jitter_level(hp: KernelHyperparams) -> float:
    """Diagonal jitter for a noise-augmented Gram matrix built with ``hp``.

    Equal to ``JITTER_SCALE * max(1, mean diagonal)``; the SE-ARD diagonal is
    constant at σ_f² + σ_n².
    """
    return JITTER_SCALE * max(1.0, hp.signal_variance + hp.noise_variance)


def se_ard_covariance(x1, x2, hp: KernelHyperparams) -> float:
    """Covariance between two input points.

    Args:
        x1: First point (length d)
        x2: Second point (length d)
        hp: Kernel hyperparameters

    Returns:
        σ_f² · exp(-½ Σ_j ((x1_j - x2_j) / ℓ_j)²)

    Raises:
        InvalidArgumentError: If either point's dimension differs from d
    """
    a = np.atleast_1d(np.asarray(x1, dtype=float))
    b = np.atleast_1d(np.asarray(x2, dtype=float))
    if a.shape != (hp.dim,) or b.shape != (hp.dim,):
        raise InvalidArgumentError(
            f"Points must have dimension {hp.dim}, got {a.shape} and {b.shape}",
            argument='x', value=(a.shape, b.shape),
        )
    scaled = (a - b) / np.asarray(hp.lengthscales)
    return hp.signal_variance * float(np.exp(-0.5 * np.dot(scaled, scaled)))


def gram_matrix(
    A,
    B,
    hp: KernelHyperparams,
    add_noise: bool = False,
    jitter: Optional[float] = None,
) -> np.ndarray:
    """Cross-covariance matrix between two input sets.

    Args:
        A: n × d input set
        B: m × d input set
        hp: Kernel hyperparameters
        add_noise: Add σ_n² plus jitter to the diagonal; only allowed when
            A and B are the same set
        jitter: Diagonal jitter used with ``add_noise`` (default: :func:`jitter_level`)

    Returns:
        n × m matrix with entry (i, j) = k(A_i, B_j)

    Raises:
        InvalidArgumentError: On dimension mismatch, or ``add_noise`` with
            two different sets
    """
    A = _as_inputs(A, 'A')
    B = _as_inputs(B, 'B')
    _check_dim(A, hp, 'A')
    _check_dim(B, hp, 'B')

    ell = np.asarray(hp.lengthscales)
    sqdist = cdist(A / ell, B / ell, metric='sqeuclidean')
    K = hp.signal_variance * np.exp(-0.5 * sqdist)

    if add_noise:
        if A is not B and (A.shape != B.shape or not np.array_equal(A, B, equal_nan=True)):
            raise InvalidArgumentError(
                "add_noise requires A and B to be the same input set",
                argument='add_noise',
            )
        if jitter is None:
            jitter = jitter_level(hp)
        K[np.diag_indices_from(K)] += hp.noise_variance + jitter
    return K


def gram_gradients(X, hp: KernelHyperparams) -> list[np.ndarray]:
    """Derivatives of the noise-augmented Gram matrix of ``X`` in log-space.

    The jitter depends on σ_f² and σ_n² through :func:`jitter_level`, and its
    derivative is included so that the result is the exact derivative of the
    matrix that :func:`gram_matrix` factorizes.

    Returns:
        d + 2 matrices, ordered like :meth:`KernelHyperparams.to_log_vector`
    """
    X = _as_inputs(X, 'X')
    _check_dim(X, hp, 'X')
    n = X.shape[0]
    K = gram_matrix(X, X, hp)

    # d(jitter)/d(log σ²) for σ² in {σ_f², σ_n²}; zero while the max(1, .) floor is active
    total = hp.signal_variance + hp.noise_variance
    jitter_signal = JITTER_SCALE * hp.signal_variance if total > 1.0 else 0.0
    jitter_noise = JITTER_SCALE * hp.noise_variance if total > 1.0 else 0.0

    grads = [K + jitter_signal * np.eye(n)]
    for j, ell in enumerate(hp.lengthscales):
        diff = X[:, j][:, None] - X[:, j][None, :]
        grads.append(K * (diff / ell) ** 2)
    grads.append((hp.noise_variance + jitter_noise) * np.eye(n))
    return grads

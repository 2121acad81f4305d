"""Exception classes for uigp."""

from typing import Any


class UIGPError(Exception):
    """Base exception for all uigp errors."""
    pass


class InvalidArgumentError(UIGPError):
    """Raised when an argument has the wrong shape, dimension or value.

    Attributes:
        message: Error message
        argument: Name of the offending argument (if applicable)
        value: Offending value (if applicable)
    """

    def __init__(self, message: str, argument: str = None, value: Any = None):
        super().__init__(message)
        self.message = message
        self.argument = argument
        self.value = value


class IllConditionedKernelError(UIGPError):
    """Raised when a noise-augmented Gram matrix cannot be Cholesky-factorized.

    Attributes:
        message: Error message
        jitter: Diagonal jitter that was added before the attempt
        size: Order of the matrix
    """

    def __init__(self, message: str, jitter: float = None, size: int = None):
        super().__init__(message)
        self.message = message
        self.jitter = jitter
        self.size = size


class OptimizationFailedError(UIGPError):
    """Raised when every hyperparameter optimization restart fails.

    Attributes:
        message: Error message
        diagnostics: One entry per restart describing how it failed
    """

    def __init__(self, message: str, diagnostics: list[str] = None):
        super().__init__(message)
        self.message = message
        self.diagnostics = diagnostics or []


class InvalidInitError(UIGPError):
    """Raised when the sampler's starting point has a non-finite log-target.

    Attributes:
        message: Error message
        value: The log-target value at the starting point
    """

    def __init__(self, message: str, value: float = None):
        super().__init__(message)
        self.message = message
        self.value = value


class PredictionFailedError(UIGPError):
    """Raised when too many per-sample GP fits fail during marginalization.

    Attributes:
        message: Error message
        dropped: Number of samples whose fit failed
        total: Number of samples attempted
    """

    def __init__(self, message: str, dropped: int = None, total: int = None):
        super().__init__(message)
        self.message = message
        self.dropped = dropped
        self.total = total


class DegenerateBandwidthError(UIGPError):
    """Raised when a KDE bandwidth cannot be chosen automatically.

    This happens when every sample has the same value.
    """

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ConfigError(UIGPError):
    """Raised when an experiment configuration is invalid.

    Attributes:
        message: Error message
        field: Configuration field that failed validation (if applicable)
        value: Invalid value (if applicable)
    """

    def __init__(self, message: str, field: str = None, value: Any = None):
        super().__init__(message)
        self.message = message
        self.field = field
        self.value = value


class UnknownFunctionError(UIGPError):
    """Raised when a latent function id is not one of the shipped functions.

    Attributes:
        message: Error message
        function_id: The unknown id
    """

    def __init__(self, message: str, function_id: str = None):
        super().__init__(message)
        self.message = message
        self.function_id = function_id


class StageError(UIGPError):
    """Raised when a pipeline stage fails.

    The original error is chained as ``__cause__``.

    Attributes:
        message: Error message
        stage: Pipeline stage tag (generate, fit, sample, predict, analyze)
    """

    def __init__(self, message: str, stage: str = None):
        super().__init__(message)
        self.message = message
        self.stage = stage

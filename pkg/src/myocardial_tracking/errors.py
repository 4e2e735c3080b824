"""Exception hierarchy for myocardial tracking."""

from typing import Sequence


class MyoTrackingError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(MyoTrackingError, ValueError):
    """Raised when operand shapes are incompatible."""

    def __init__(self, op: str, shape_a: Sequence[int], shape_b: Sequence[int], detail: str = ""):
        self.op = op
        self.shape_a = tuple(shape_a)
        self.shape_b = tuple(shape_b)
        message = f"{op}: incompatible shapes {self.shape_a} and {self.shape_b}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class TapeError(MyoTrackingError, RuntimeError):
    """Raised for invalid use of the gradient tape."""


class ConfigError(MyoTrackingError, ValueError):
    """Raised for invalid or unknown configuration values."""


class PhantomSpecError(ConfigError):
    """Raised when a phantom specification violates its invariants."""


class ContainerFormatError(MyoTrackingError, ValueError):
    """Raised when a tensor container file cannot be parsed."""


class MetricError(MyoTrackingError, ValueError):
    """Raised when a metric cannot be computed from its inputs."""


class NonFiniteGradientError(MyoTrackingError, FloatingPointError):
    """Raised when a parameter receives a NaN or infinite gradient."""

    def __init__(self, param_name: str, n_bad: int, total: int):
        self.param_name = param_name
        super().__init__(
            f"non-finite gradient for parameter '{param_name}' "
            f"({n_bad} of {total} entries)"
        )


class DivergenceError(MyoTrackingError, RuntimeError):
    """Raised when the training loss runs away from its initial value."""

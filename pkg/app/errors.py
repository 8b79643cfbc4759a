"""
Exception hierarchy shared by the tracking services, workers and CLI.
"""
from typing import Optional


class TrackingError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(TrackingError, ValueError):
    """A numeric parameter is outside its admissible range."""


class CapacityError(TrackingError):
    """A bounded structure was fed more inputs than it was created for."""


class ProtocolError(TrackingError):
    """A message arrived in a state where the protocol does not allow it."""


class BootstrapRequired(TrackingError):
    """
    Raised when the block size of a round would be smaller than one item.

    Attributes:
        threshold (int): Smallest starting count for which a normal round can begin.
    """

    def __init__(self, threshold: int):
        super().__init__(f"Block size below one item; normal rounds need N0 >= {threshold}")
        self.threshold = threshold


class AuditError(TrackingError):
    """Transcript and item log do not describe the same run."""


class TrialAborted(TrackingError):
    """A trial stopped on a protocol error."""

    def __init__(self, trial_index: int, step: int, cause: Exception):
        super().__init__(f"Trial {trial_index} aborted at step {step}: {cause}")
        self.trial_index = trial_index
        self.step = step
        self.cause = cause


class ConfigError(TrackingError):
    """
    Invalid experiment configuration.

    Attributes:
        exit_code (int): Process exit code the CLI should return.
    """

    def __init__(self, detail: str, exit_code: int = 2, key: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        self.exit_code = exit_code
        self.key = key

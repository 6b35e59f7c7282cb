"""
Exception hierarchy for NodalNet.

Every error raised on purpose by the package derives from NodalNetError so the
command line driver can turn it into a machine-readable error document.
"""

from typing import Any, Dict, Optional


class NodalNetError(Exception):
    """Base class for all NodalNet errors"""

    exit_code = 1

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class InvalidArgumentError(NodalNetError, ValueError):
    """A precondition on an argument was violated"""

    exit_code = 2


class DimensionError(NodalNetError, ValueError):
    """Lengths or shapes do not agree"""

    exit_code = 2


class ConfigError(NodalNetError, ValueError):
    """An experiment or training configuration failed validation"""

    exit_code = 2


class FormatError(NodalNetError):
    """A trajectory or checkpoint file could not be decoded"""

    exit_code = 3


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


class ShapeMismatchError(FormatError):
    pass


class NumericalError(NodalNetError, ArithmeticError):
    """Non-finite values or a singular system"""

    exit_code = 4


class TrainingDivergedError(NumericalError):
    """
    Raised when the training loss becomes non-finite.

    Carries the last parameters, optimizer state and history that were still
    finite so the caller can checkpoint them.
    """

    def __init__(self, message: str, params: Any = None, adam_state: Any = None,
                 history: Any = None, step: Optional[int] = None):
        super().__init__(message)
        self.params = params
        self.adam_state = adam_state
        self.history = history
        self.step = step

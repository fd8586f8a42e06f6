# platoonsim/core/errors.py
from typing import Any, Optional


class PlatoonSimError(Exception):
    """Base class for every error raised by platoonsim."""


class ConfigError(PlatoonSimError, ValueError):
    """Invalid configuration key, value or parameter range."""


class ModelRequiredError(ConfigError):
    """A learned strategy was requested without a model."""


class NumericDomainError(PlatoonSimError, ValueError):
    """Non-finite or otherwise out-of-domain numeric input."""


class StructuralError(PlatoonSimError, ValueError):
    """Shape, index or length mismatch between collaborating values."""


class NotReadyError(PlatoonSimError):
    """Replay buffer holds fewer transitions than requested."""


class FormatError(PlatoonSimError):
    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = ""
        if path:
            where += f"{path}"
        if line is not None:
            where += f" line {line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ProfileFormatError(FormatError):
    """Velocity profile file could not be parsed."""


class ModelFormatError(FormatError):
    """Model file could not be parsed."""


class TrainingDivergenceError(PlatoonSimError):
    """Critic loss became non-finite; carries the last good networks."""

    def __init__(self, message: str, checkpoint: Any = None, curve: Optional[list] = None):
        super().__init__(message)
        self.checkpoint = checkpoint
        self.curve = curve or []

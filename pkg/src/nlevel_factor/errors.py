"""
Error hierarchy for nlevel-factor.

Every error raised on purpose by the library derives from NFactorError and
carries an ErrorType classification plus the process exit code the CLI uses
when the error escapes a command.
"""

from __future__ import annotations

from enum import Enum
from typing import ClassVar


class ErrorType(str, Enum):
    """Classification of library errors.

    CONFIG-family errors are caused by the caller's input and map to exit
    code 2. CAP and INVARIANT are reported separately so scripts can tell a
    too-large request apart from a numerical self-check failure.
    """

    CONFIG = "config"
    SYMMETRY = "symmetry"
    FACTORIZATION = "factorization"
    EMPTY_SECTOR = "empty_sector"
    CAP = "cap"
    INVARIANT = "invariant"


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_INVARIANT = 4


class NFactorError(Exception):
    """Base class for all nlevel-factor errors."""

    error_type: ClassVar[ErrorType] = ErrorType.CONFIG
    exit_code: ClassVar[int] = EXIT_CONFIG

    def to_dict(self) -> dict[str, str]:
        """Serialize for `--json` error output."""
        return {"error": str(self), "type": self.error_type.value}


class ConfigError(NFactorError, ValueError):
    """Invalid model, run configuration, or argument."""


class SymmetryError(ConfigError):
    """A symmetry was requested that the model does not have."""

    error_type = ErrorType.SYMMETRY


class FactorizationError(ConfigError):
    """The factorization equations cannot be solved for these inputs."""

    error_type = ErrorType.FACTORIZATION


class EmptySectorError(ConfigError):
    """A projection onto a symmetry sector has zero weight."""

    error_type = ErrorType.EMPTY_SECTOR


class DimensionCapError(NFactorError):
    """The requested matrix is larger than the configured dimension cap."""

    error_type = ErrorType.CAP
    exit_code = EXIT_CAP

    def __init__(self, what: str, size: int, cap: int) -> None:
        super().__init__(f"{what} has size {size}, above the dimension cap {cap} (raise it with --cap)")
        self.size = size
        self.cap = cap


class InvariantError(NFactorError, RuntimeError):
    """An internal numerical self-check failed."""

    error_type = ErrorType.INVARIANT
    exit_code = EXIT_INVARIANT


def check_cap(what: str, size: int, cap: int) -> None:
    """Raise DimensionCapError when size exceeds cap."""
    if size > cap:
        raise DimensionCapError(what, size, cap)

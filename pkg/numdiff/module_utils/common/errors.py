# ./numdiff/module_utils/common/errors.py

from typing import List, Optional


class NumDiffError(Exception):
    """Base class for every error raised by numdiff."""


class InvalidArgumentError(NumDiffError, ValueError):
    """An argument or configuration value violates its documented contract."""


class SignalFormatError(NumDiffError):
    """A signal file does not follow the `t,y[,d1,d2]` layout."""


class SignalParseError(SignalFormatError):
    """
    A cell of a signal file could not be parsed

    Args:
        line: 1-based line number of the offending row (header is line 1)
        message: Description of the problem
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NumericalError(NumDiffError):
    """A factorisation or inversion failed."""


class DegenerateFilterError(NumericalError):
    """The Kalman innovation variance C P_f C^T + V2 is not positive."""


class UndefinedMetricError(NumDiffError):
    """The RMSE denominator is zero through the requested step."""


class ConfigError(NumDiffError):
    """
    Collected configuration violations

    Args:
        errors: One message per invalid field, each prefixed with its path
    """

    def __init__(self, errors: List[str], message: Optional[str] = None):
        self.errors = list(errors)
        super().__init__(message or "; ".join(self.errors))

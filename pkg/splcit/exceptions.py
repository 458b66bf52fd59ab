"""
Exception classes for splcit.
"""

from typing import Optional


class SplcitError(Exception):
    """Base exception for all splcit errors."""

    pass


class ModelError(SplcitError):
    """Base class for feature model problems."""

    pass


class ModelParseError(ModelError):
    """Raised when a .fm model file cannot be parsed."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        source: Optional[str] = None,
    ):
        self.line = line
        self.column = column
        self.source = source
        self.reason = message
        if line is not None:
            location = f"line {line}" + (f", column {column}" if column else "")
            message = f"{location}: {message}"
        if source:
            message = f"{source}: {message}"
        super().__init__(message)


class ModelValidationError(ModelError):
    """Raised when a FeatureModel violates a structural invariant."""

    pass


class VoidModelError(ModelError):
    """Raised when a feature model denotes no valid product."""

    pass


class DimensionMismatchError(SplcitError, ValueError):
    """Raised when a feature set or t-set does not match the feature list."""

    pass


class EnumerationOverflowError(SplcitError):
    """Raised when product enumeration or counting exceeds the configured cap."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"Product enumeration exceeded the cap of {cap} products")

    def __reduce__(self):
        return (self.__class__, (self.cap,))


class SuiteFormatError(SplcitError):
    """Raised when a covering-array file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IncompleteCoveringArrayError(SplcitError):
    """Raised when a generated array leaves valid t-sets uncovered or has invalid rows."""

    def __init__(self, model: str, algorithm: str, seed: int, detail: str = ""):
        self.model = model
        self.algorithm = algorithm
        self.seed = seed
        self.detail = detail
        message = (
            f"Incomplete covering array for model '{model}', "
            f"algorithm '{algorithm}', seed {seed}"
        )
        if detail:
            message += f": {detail}"
        super().__init__(message)

    def __reduce__(self):
        return (self.__class__, (self.model, self.algorithm, self.seed, self.detail))


class UndefinedMetricError(SplcitError):
    """Raised when a metric is requested for an empty suite."""

    pass


class UndefinedCorrelationError(SplcitError):
    """Raised when a correlation is requested for constant data."""

    pass


class GeneratorConfigError(SplcitError, ValueError):
    """Raised when generator parameters are out of range."""

    pass


class ConfigFormatError(SplcitError):
    """Raised when a benchmark configuration file is invalid."""

    pass


class ConfigNotFoundError(SplcitError):
    """Raised when a benchmark configuration file does not exist."""

    pass


class ModelNotFoundError(SplcitError):
    """Raised when no model files are found for a benchmark."""

    pass


class ProfileNotFoundError(SplcitError):
    """Raised when a requested benchmark profile is not found."""

    pass


class CircularInheritanceError(SplcitError):
    """Raised when circular inheritance is detected in benchmark profiles."""

    pass

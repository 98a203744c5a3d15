"""Exception types raised across the package."""


class MlioError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MlioError, ValueError):
    pass


class ZeroRow(MlioError, ValueError):
    pass


class EmptyFeasibleSet(MlioError):
    """Raised when phase 1 proves the constraint system has no solution."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class DimensionTooLarge(MlioError, ValueError):
    pass


class InstanceTooLarge(MlioError, ValueError):
    pass


class NoAttainableFace(MlioError):
    pass


class MalformedCsv(MlioError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingGroupMap(MlioError, ValueError):
    pass

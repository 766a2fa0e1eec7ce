"""Exception types shared across the package."""


class CounselorError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CounselorError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataIntegrityError(CounselorError):
    """Input data violates a structural requirement (ordering, sign, shape)."""


class InsufficientHistoryError(CounselorError):
    """A windowed computation was asked for more history than exists."""


class SymbolNotFoundError(CounselorError):
    """A requested ticker is absent from the data file."""


class DimensionMismatchError(CounselorError):
    """Two vectors or matrices that must align do not."""


class ConvergenceError(CounselorError):
    """An iterative solver hit its iteration cap; carries the final residual."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual={residual:.3e})")


class NoRuleFiredError(CounselorError):
    """Fuzzy inference produced an identically-zero aggregate membership."""


class MissingInputError(CounselorError):
    """A required input variable or data point is absent."""

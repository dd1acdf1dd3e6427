"""Exception hierarchy shared by every module in the package."""


class LocalEigError(Exception):
    """Base class for all package errors."""


class InputError(LocalEigError, ValueError):
    """Malformed or inconsistent input data."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModeError(InputError):
    """An operation received a matrix in the wrong mode."""


class NumericalError(LocalEigError, ArithmeticError):
    """Eigensolver or iteration failure, or a violated accuracy contract."""

    def __init__(self, message, column=None):
        if column is not None:
            message = f"{message} (column {column})"
        super().__init__(message)
        self.column = column


class DegenerateSpectrum(LocalEigError):
    """No eigenvalue with positive real part is available for gap selection.

    ``centrality`` carries the all-zero centrality vector when the error is
    raised from a centrality computation.
    """

    def __init__(self, message, centrality=None):
        super().__init__(message)
        self.centrality = centrality


class IngestWarning(UserWarning):
    """Recoverable problem found while loading a dataset."""

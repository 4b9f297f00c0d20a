"""Exception hierarchy shared by the library and the command line."""


class RetrievalError(Exception):
    """Base class for errors raised by this package."""


class DataError(RetrievalError, ValueError):
    """Malformed input files or inputs that cannot be processed."""


class NumericalError(RetrievalError, ArithmeticError):
    """A solver produced or would produce non-finite values."""

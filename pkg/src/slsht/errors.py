class SlshtError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(SlshtError, ValueError):
    """Invalid parameters or inconsistent input files."""


class NumericalError(SlshtError, ArithmeticError):
    """A numerical procedure could not produce a usable result."""


class ConvergenceError(NumericalError):
    pass


class ZeroDCError(NumericalError):
    """The window has no DC component, so the signal cannot be recovered."""

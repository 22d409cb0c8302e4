"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Malformed input: bad dimensions, non-finite values, broken file formats."""


class NumericalError(RuntimeError):
    """Numerical breakdown inside an iterative computation (divergence, non-finite loss)."""

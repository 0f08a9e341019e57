"""Exception types raised by :mod:`emtopopt`."""


class ConfigurationError(ValueError):
    """Invalid problem, grid or optimizer configuration."""


class SolverError(RuntimeError):
    """The sparse direct solver failed (singular or ill-conditioned system)."""


class NumericalError(RuntimeError):
    """Non-finite values appeared in a field or sensitivity."""

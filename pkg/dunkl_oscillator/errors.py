"""Exception hierarchy shared by the library and the command line."""

from . import config


class DunklError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""
    exit_code = config.EXIT_DOMAIN


class DomainError(DunklError):
    """A parameter lies outside its admissible range."""


class SingularPoint(DunklError):
    """Evaluation requested where the quantity is undefined (x = 0, U-boundary)."""


class ParityError(DunklError):
    """A parity precondition on an index or a coefficient sequence failed."""


class GridAsymmetric(DunklError):
    """A sampled grid is not symmetric about 0."""


class NearZeroDivision(DunklError):
    """Division by p_k at (or numerically at) one of its zeros."""


class DegreeTooHigh(DunklError):
    """Polynomial degree beyond what the requested rule handles."""


class RegimeError(DunklError):
    """A scan was requested outside the regime where its statistic is defined."""


class BadFamily(DunklError):
    """Unknown perturbation family or invalid family parameters."""


class ConvergenceError(DunklError):
    """An iterative solver or root bracket failed."""
    exit_code = config.EXIT_CONVERGENCE


class TruncationWarning(UserWarning):
    """A coefficient sequence still carries noticeable mass in its tail."""

class EngelError(Exception):
    """Base class for library errors."""


class DomainError(EngelError, ValueError):
    """A point, disk or ball preimage falls outside the chart domain."""


class RankDeficientError(EngelError, ValueError):
    """The chart differential has rank < 2 at a probed point."""


class ConvergenceError(EngelError, RuntimeError):
    """An iterative method or a refinement schedule did not converge."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual

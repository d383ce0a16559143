"""Exception types shared by the toolkit."""


class DomainError(ValueError):
    """An input lies outside the valid domain of an operation."""


class ParseError(DomainError):
    """A trace or config file could not be parsed."""


class InfeasibleError(DomainError):
    """A design target cannot be reached inside the given bounds."""

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class ConvergenceError(ArithmeticError):
    """An iterative solver ran out of iterations.

    ``last`` and ``previous`` hold the final two iterates so callers can
    judge how far from convergence the solver was.
    """

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous

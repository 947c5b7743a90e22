"""Exception hierarchy shared by all permex modules."""


class PermexError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PermexError, ValueError):
    """Invalid input or a parameter outside an operation's domain."""


class InfeasiblePointError(DomainError):
    """A point violating a feasibility inequality; names the violated one."""

    def __init__(self, inequality, value):
        self.inequality = inequality
        self.value = value
        super().__init__(f"infeasible point: {inequality} violated (got {value!r})")


class CapacityError(PermexError):
    """Work or dimension exceeds a configured budget."""


class SolverError(PermexError):
    """Iterative solver failed to converge; carries the best point found."""

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)

"""Exception hierarchy shared by all modules."""


class MongesphereError(Exception):
    """Base class for all package errors."""


class ValidationError(MongesphereError):
    """Invalid input: broken invariant, dimension mismatch, bad descriptor."""


class SolverError(MongesphereError):
    """Numerical failure: iteration cap, non-convergent quadrature, infeasibility."""


class PathRefusal(MongesphereError):
    """An exact evaluation path refused because its hypotheses do not hold.

    ``diagnostic`` names the violated assumption so callers can report why
    the fast path was skipped before falling back to numerical transport.
    """

    def __init__(self, diagnostic: str):
        super().__init__(diagnostic)
        self.diagnostic = diagnostic

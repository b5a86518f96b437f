"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration.

    Carries the full list of validation messages so a user sees every
    problem at once, not just the first.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SingularMatrixError(RuntimeError):
    """A direct factorization hit a numerically singular pivot."""

    def __init__(self, message, dof=None):
        self.dof = dof
        if dof is not None:
            message = f"{message} (dof {dof})"
        super().__init__(message)


class NonConvergenceError(RuntimeError):
    """The fixed-stress iteration exceeded its iteration budget.

    ``history`` holds the per-iteration relative change norms recorded
    before the abort; ``slab`` is the 1-based slab index when known.
    """

    def __init__(self, message, history=None, slab=None):
        self.history = list(history or [])
        self.slab = slab
        super().__init__(message)


class SolverError(RuntimeError):
    """A converged solution failed its residual verification."""

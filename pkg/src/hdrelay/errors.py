"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A probability object failed its invariants (negative mass, bad total, inconsistency)."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConstraintViolation(ValueError):
    """A channel input violates the relay model (e.g. (N, N) under the binary model)."""


class IntegrityError(RuntimeError):
    """A received block cannot have been produced by the matching encoder."""


class SolverError(RuntimeError):
    """An iterative solver hit its iteration cap; ``best`` carries the best result so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ZeroErrorViolation(RuntimeError):
    """A decoded message differs from the one sent."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report

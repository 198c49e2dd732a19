"""Exception types shared across the package."""


class QCError(Exception):
    """Base class for all package errors."""


class InvalidInput(QCError, ValueError):
    """Malformed input: non-finite entries, wrong shapes, non rank-one probes."""


class DomainError(QCError, ValueError):
    """Argument outside the domain where a functional or operation is defined."""


class ClassError(QCError, ValueError):
    """A map or profile does not belong to the class an operation requires."""


class InvalidSpec(QCError, ValueError):
    """A packing description violates the nesting/disjointness rules."""


class DistortionBound(QCError, ValueError):
    """Beltrami coefficient with ess-sup modulus k >= 1 (or above the configured cap)."""


class NonConvergence(QCError, RuntimeError):
    """Neumann iteration stalled before reaching the requested tolerance."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class InvalidFamily(QCError, ValueError):
    """An analytic family produced non-finite values or vanished while flagged non-vanishing."""

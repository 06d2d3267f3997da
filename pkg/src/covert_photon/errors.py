"""Exception types shared across the package."""


class CovertPhotonError(Exception):
    """Base class for all package errors."""


class DomainError(CovertPhotonError, ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class CutoffTooSmall(CovertPhotonError, ValueError):
    """More than the allowed probability mass lies above the Fock cutoff."""


class CutoffMismatch(CovertPhotonError, ValueError):
    """Two states expanded in truncated bases of different size."""


class SupportViolation(CovertPhotonError, ValueError):
    """Relative entropy is infinite: p has mass where q has none."""


class InvalidState(CovertPhotonError, ValueError):
    """Matrix fails the Hermitian / unit-trace / PSD checks."""


class DegenerateMask(CovertPhotonError, RuntimeError):
    """The two-stage OOK slot selection picked no slots."""


class RejectionBudgetExceeded(CovertPhotonError, RuntimeError):
    """Husimi rejection sampling would need too many proposals per sample."""

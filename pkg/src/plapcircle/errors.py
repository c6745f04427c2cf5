"""Exception types shared across the library."""


class PlapError(Exception):
    """Base class for all library errors."""


class InvalidExponent(PlapError):
    """Exponent outside the admissible range (p must exceed 1)."""


class NonConvergent(PlapError):
    """Adaptive quadrature hit its depth limit before meeting tolerance."""


class NonIntegrable(PlapError):
    """Endpoint blow-up of order >= 1, the integral does not exist."""


class InvalidBracket(PlapError):
    """Root bracket without a sign change."""


class StepUnderflow(PlapError):
    """ODE step size collapsed below the machine-scale threshold."""


class NonPeriodic(PlapError):
    """Shooting ran past the time cap without closing the orbit."""


class OutOfRange(PlapError):
    """Seed amplitude or parameter outside its admissible interval."""


class ZeroFunction(PlapError):
    """Operation undefined on the identically-zero grid function."""


class NonPositive(PlapError):
    """Operation requires strictly positive samples."""


class DomainError(PlapError):
    """Argument left the domain of the convexity profile."""


class PositivityLost(PlapError):
    """Flow iterate dipped below zero; the step size or regularization is off."""


class BranchRangeExceeded(PlapError):
    """Requested value lies outside the traced branch."""


class InsufficientBranch(PlapError):
    """Traced branch never approaches the diagonal."""

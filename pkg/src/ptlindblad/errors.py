"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`PTLindbladError`, so callers (the CLI in particular) can tell
numerical failures apart from programming mistakes.
"""


class PTLindbladError(Exception):
    """Base class for all package errors."""


class ValidationError(PTLindbladError, ValueError):
    """Input violates a documented precondition."""


class NotHermitian(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class TraceViolation(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DimensionOutOfRange(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class MaximallyMixed(ValidationError):
    pass


class SingularMetric(ValidationError):
    pass


class NotPseudoHermitian(ValidationError):
    pass


class StepTooLarge(ValidationError):
    pass


class NumericalError(PTLindbladError, ArithmeticError):
    """A computation failed or produced an untrustworthy result."""


class Overflow(NumericalError, OverflowError):
    pass


class NoConvergence(NumericalError):
    """Eigenvalue iteration ran out of budget.

    ``values`` holds whatever eigenvalues were obtained before giving up
    (possibly inaccurate), so callers can still inspect them.
    """

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values


class ImaginaryResidue(NumericalError):
    """A quantity that must be real came out with a sizeable imaginary part."""


class PositivityViolation(NumericalError):
    """A propagated state left the set of density matrices."""


class ZeroNormJump(NumericalError):
    pass

"""Exception hierarchy shared across the package."""


class InvolutorError(Exception):
    """Base class for all computation errors raised by this package."""


class MalformedInputError(InvolutorError):
    """Structurally invalid value (zero denominator, bad index, ...)."""


class ContextMismatchError(InvolutorError):
    """Values from incompatible variable contexts were combined."""


class NoClassError(InvolutorError):
    """The zero multi-index has no class."""


class ShapeError(InvolutorError):
    """Matrix shapes do not match for the requested operation."""


class InconsistentSystemError(InvolutorError):
    """Reduction produced a nonzero equation with empty support (1 = 0)."""


class NotSolvedError(InvolutorError):
    """Operation requires a system in solved form."""


class NotInvolutiveError(InvolutorError):
    """Operation requires an involutive system."""


class NotFormallyIntegrableError(InvolutorError):
    """Operation requires a formally integrable system; complete it first."""


class BudgetExceededError(InvolutorError):
    """A prolongation/retry budget ran out before stabilization."""


class DeltaRegularityError(InvolutorError):
    """No delta-regular coordinate change found within the retry budget."""


class InvariantViolationError(InvolutorError):
    """Two independent computations of the same quantity disagree."""


class PreconditionError(InvolutorError):
    """Caller violated a documented precondition."""

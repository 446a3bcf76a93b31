"""Exception hierarchy shared by every qsec module."""


class QsecError(Exception):
    """Base class for all errors raised by qsec."""


class MixedSemirings(QsecError, TypeError):
    """Raised when values or structures from different semirings are combined."""


class NegationUndefined(QsecError):
    """The active semiring has no negation operator."""


class NonConvergent(QsecError):
    """A fixpoint iteration did not stabilise within its bound."""


class QsecSyntaxError(QsecError, ValueError):
    """Malformed process, formula, weight or model-file text."""

    def __init__(self, message, position=None, text=None):
        self.message = message
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class UnboundVariable(QsecError):
    """A process variable has no definition in the environment."""


class UnguardedRecursion(QsecError):
    """A cycle of process definitions is not guarded by a prefix."""


class StateLimitExceeded(QsecError):
    """State-space exploration exceeded the configured limit."""


class TruncatedComparison(QsecError):
    """A trace-set comparison would rely on a depth-truncated enumeration."""


class UnsupportedPartialOrder(QsecError):
    """The operation needs a totally ordered semiring."""


class StateNotFound(QsecError, KeyError):
    """A state is not part of the transition system."""


class ExplosionGuard(QsecError):
    """An enumeration would exceed its configured cap."""


class UnknownAlpha(QsecError):
    """The requested expected-behaviour transform is not a known built-in."""


class UnknownCheck(QsecError):
    """The requested check id does not exist in the model file."""

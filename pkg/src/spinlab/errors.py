"""Exception types raised across spinlab."""


class SpinlabError(Exception):
    """Base class for all library errors."""


class InvalidParity(SpinlabError, ValueError):
    pass


class DegenerateGraph(SpinlabError, ValueError):
    pass


class RestartBudgetExceeded(SpinlabError, RuntimeError):
    pass


class SizeViolation(SpinlabError, ValueError):
    pass


class NotAPartition(SpinlabError, ValueError):
    pass


class MarginViolation(SpinlabError, ValueError):
    pass


class ParameterTooSmall(SpinlabError, ValueError):
    pass


class StateSpaceTooLarge(SpinlabError, ValueError):
    pass


class NonReversibleRule(SpinlabError, ValueError):
    pass


class ShapeMismatch(SpinlabError, ValueError):
    pass


class NullEvent(SpinlabError, ValueError):
    pass


class DegenerateInput(SpinlabError, ValueError):
    pass


class OutOfRange(SpinlabError, IndexError):
    pass


class TruncationOverflow(SpinlabError, ValueError):
    pass


class DoubleFlip(SpinlabError, RuntimeError):
    """A cluster-store update that contradicts the current spin of a vertex."""


class InvariantViolation(SpinlabError, RuntimeError):
    """A coupling or domination invariant failed during a run.

    ``diagnostic`` holds whatever the engine knew at the time of the breach.
    """

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class DominationViolation(InvariantViolation):
    pass


class InclusionViolation(InvariantViolation):
    pass

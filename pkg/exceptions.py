"""
Exception hierarchy for the self-similar solutions laboratory.

The command line maps these onto exit codes:
- ValidationError -> 2
- NumericalFailure (and subclasses) -> 3
- OSError -> 4
"""


class SelfSimError(Exception):
    """Base class for all laboratory errors."""


class ValidationError(SelfSimError, ValueError):
    """Invalid parameters or configuration, raised before any computation."""

    def __init__(self, message, keys=None):
        super().__init__(message)
        self.keys = list(keys or [])


class NumericalFailure(SelfSimError):
    """A computation could not be completed to the requested accuracy."""


class StepUnderflow(NumericalFailure):
    """Step size fell below h_min. Carries the last accepted state."""

    def __init__(self, message, eta=None, state=None, trajectory=None):
        super().__init__(message)
        self.eta = eta
        self.state = state
        self.trajectory = trajectory


class NonFiniteState(NumericalFailure):
    """Overflow or NaN encountered while stepping."""

    def __init__(self, message, eta=None, state=None, trajectory=None):
        super().__init__(message)
        self.eta = eta
        self.state = state
        self.trajectory = trajectory


class StepBudgetExceeded(NumericalFailure):
    pass


class BracketFailure(NumericalFailure):
    pass


class DegenerateShot(NumericalFailure):
    """Both exit events fired at the same point within the event tolerance."""

    def __init__(self, message, beta=None):
        super().__init__(message)
        self.beta = beta


class NotEnoughOscillations(NumericalFailure):
    pass


class RankDeficientFit(NumericalFailure):
    pass


class LevelCurveError(NumericalFailure):
    def __init__(self, message, slice_x=None):
        super().__init__(message)
        self.slice_x = slice_x


class ConsistencyError(NumericalFailure):
    """An internal cross-check (closed form vs. numerical oracle) disagreed."""

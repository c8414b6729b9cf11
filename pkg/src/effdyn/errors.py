"""Exception types raised across the package."""


class EffdynError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(EffdynError, ValueError):
    pass


class NonBackdrivable(EffdynError):
    """The transmission is self-locking (backward efficiency would be negative)."""


class DivergentInertia(EffdynError):
    """Backward-driven apparent inertia is unbounded (backward efficiency is zero)."""


class LockedTransmission(EffdynError):
    """A transmission assigned to backward mode has zero backward efficiency."""


class SingularTopology(EffdynError):
    pass


class SingularJacobian(EffdynError):
    pass


class StiffnessFailure(EffdynError):
    """Meshing force turned tensile; the bilateral contact model no longer applies."""


class NoSlip(EffdynError):
    pass


class DegenerateEnergy(EffdynError):
    pass


class ParseError(EffdynError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ModeViolation(UserWarning):
    """Realized power flow contradicts the assigned drive mode."""

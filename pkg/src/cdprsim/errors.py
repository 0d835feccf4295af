"""Exception types shared across the package."""


class CdprError(Exception):
    """Base class for all cdprsim errors."""


class DegenerateCableError(CdprError):
    """A cable has (numerically) zero length; directions are undefined."""


class NonPositiveLengthError(CdprError):
    """A cable length or reference length is not strictly positive."""


class InfeasibleWrenchError(CdprError):
    """No tension vector above the floor tension achieves the desired wrench."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoEquilibriumError(CdprError):
    """Passive-orientation root finding failed to converge."""


class OutsideWallError(CdprError):
    """Clutch engagement attempted outside the virtual wall without override."""


class ClutchDisengagedError(CdprError):
    """A task-space command was requested while the clutch is disengaged."""


class AtCenterError(CdprError):
    """Repulsion direction is undefined at the wall center."""


class TooFewMembersError(CdprError):
    """Not enough member samples to fit the wall ellipsoid."""


class TrajectoryParseError(CdprError):
    """A trajectory record file failed to parse."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class ProtocolError(CdprError):
    """A wire message violates the framing or schema; answered with a NACK."""

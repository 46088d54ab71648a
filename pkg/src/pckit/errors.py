"""Exception and warning hierarchy.

Every error carries an ``exit_code`` used by the command-line front end.
"""


class PhaseCenterError(Exception):
    exit_code = 1


class MalformedInput(PhaseCenterError):
    """Missing file, unreadable manifest or inconsistent run configuration."""
    exit_code = 2


class MalformedRow(MalformedInput):
    exit_code = 3


class NonUniformGrid(MalformedInput):
    exit_code = 4


class MissingSample(MalformedInput):
    exit_code = 5


class DuplicateSample(MalformedInput):
    exit_code = 6


class GridMismatch(PhaseCenterError):
    exit_code = 7


class PolarizationMismatch(PhaseCenterError):
    exit_code = 8


class AlreadyUnwrapped(PhaseCenterError):
    exit_code = 9


class EmptyRegion(PhaseCenterError):
    exit_code = 10


class RegionTooSmall(PhaseCenterError):
    exit_code = 11


class InvalidSampleInRegion(PhaseCenterError):
    exit_code = 12


class NonFiniteObjective(PhaseCenterError):
    exit_code = 13


class SearchRadiusExceeded(PhaseCenterError):
    exit_code = 14


class ZeroAmplitudeWarning(UserWarning):
    """Raised as a warning: a sample has no defined phase and was masked."""


class InvalidRunWarning(UserWarning):
    """An invalid sample split a theta cut; unwrapping restarted after it."""


class MagnitudeSpreadWarning(UserWarning):
    """Magnitude over the region varies more than the consistency threshold."""

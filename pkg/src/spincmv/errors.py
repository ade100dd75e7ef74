"""Exception and warning types raised across the package.

Every error carries a stable ``code`` used by the command line interface when
it reports failures as JSON.
"""


class SpinCMVError(Exception):
    code = "SpinCMVError"
    exit_code = 1


class NonPhysicalDensity(SpinCMVError):
    """A supplied density matrix is not Hermitian, unit-trace and PSD."""

    code = "NonPhysicalDensity"
    exit_code = 4


class NonPhysicalObservables(SpinCMVError):
    """Bloch vectors and correlations that correspond to no quantum state."""

    code = "NonPhysicalObservables"
    exit_code = 5


class NotSymmetric(SpinCMVError):
    code = "NotSymmetric"
    exit_code = 6


class NotUnit(SpinCMVError):
    code = "NotUnit"
    exit_code = 6


class NoLevelSet(SpinCMVError):
    code = "NoLevelSet"
    exit_code = 7


class QuadratureNotConverged(SpinCMVError):
    code = "QuadratureNotConverged"
    exit_code = 8


class TruncationError(SpinCMVError):
    code = "TruncationError"
    exit_code = 8


class StepSizeTooLarge(SpinCMVError):
    code = "StepSizeTooLarge"
    exit_code = 8


class ParseError(SpinCMVError):
    code = "ParseError"
    exit_code = 3


class ConfigError(SpinCMVError):
    code = "ConfigError"
    exit_code = 2


class IoError(SpinCMVError):
    code = "IoError"
    exit_code = 9


class UnvalidatedRegime(UserWarning):
    """Closed forms evaluated outside the regime they were checked in."""


class GridTooCoarse(UserWarning):
    """Level-set mesh changes noticeably when the sampling grid is refined."""

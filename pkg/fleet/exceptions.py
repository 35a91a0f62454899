"""
Exceptions raised by the fleet model, the solvers and the calibration tools.

Each class carries the process exit code used by the management commands.
"""


class BackcastError(Exception):
    """Base class for all domain errors."""
    exit_code = 1


class DataError(BackcastError):
    """Inputs are missing, malformed or inconsistent."""
    exit_code = 3


class FixtureError(DataError):
    """A fixture file failed schema validation."""

    def __init__(self, path, line, detail):
        self.path = str(path)
        self.line = line
        self.detail = detail
        where = f'{self.path}:{line}' if line is not None else self.path
        super().__init__(f'{where}: {detail}')


class YearOutOfRangeError(DataError):
    """A series does not cover the requested year."""

    def __init__(self, year, first, last, series='series'):
        self.year = year
        super().__init__(f'{series} covers {first}-{last}, year {year} requested')


class PolicyBoundsError(DataError):
    """An incentive lies outside [0, C_2^P(t)]."""


class CalibrationError(DataError):
    """Historical data cannot support the requested identification."""


class InfeasibleTargetError(BackcastError):
    """The emissions cap lies outside the achievable interval."""
    exit_code = 2

    def __init__(self, target_gt, low_gt, high_gt):
        self.target_gt = target_gt
        self.achievable = (low_gt, high_gt)
        super().__init__(
            f'target {target_gt:.6g} Gt is infeasible; '
            f'achievable cumulative emissions are [{low_gt:.6g}, {high_gt:.6g}] Gt'
        )


class ConvergenceError(BackcastError):
    """A solver stopped before meeting its tolerances."""
    exit_code = 4

    def __init__(self, message, constraint_residual_gt=None, stationarity=None):
        self.constraint_residual_gt = constraint_residual_gt
        self.stationarity = stationarity
        super().__init__(message)


class LambertDomainError(ValueError):
    """Argument below the branch point -1/e."""

"""Exception hierarchy shared by every module."""


class SinhLabError(Exception):
    """Base class for all library errors."""


class ComputeError(SinhLabError):
    """A numerical routine failed; the CLI maps this to exit status 1."""


class ConfigError(SinhLabError):
    """Invalid user configuration; the CLI maps this to exit status 2."""


class DomainError(ComputeError, ValueError):
    pass


class NonConvergence(ComputeError):
    pass


class NoSignChange(ComputeError):
    pass


class NewtonDiverged(ComputeError):
    pass


class BranchCut(DomainError):
    pass


class UndefinedOnCut(DomainError):
    pass


class OnContour(DomainError):
    pass


class WrongSheet(ComputeError):
    pass


class CoincidentPoints(DomainError):
    pass


class OutsideRadius(DomainError):
    pass


class RegionMismatch(DomainError):
    pass


class BracketFailure(ComputeError):
    pass


class AnalyticityViolation(ComputeError):
    pass


class LogBranch(ComputeError):
    pass


class OnCut(DomainError):
    pass


class TailBoundFailure(ComputeError):
    pass


class SingularBimomentMatrix(ComputeError):
    pass

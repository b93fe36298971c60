"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`TaperFDAError`; most also derive from :class:`ValueError` so callers
that only know the builtin still catch bad input.
"""


class TaperFDAError(Exception):
    """Base class for all package errors."""


# numerics
class DimensionMismatch(TaperFDAError, ValueError):
    pass


class NotSPD(TaperFDAError, ValueError):
    pass


class InvalidParameter(TaperFDAError, ValueError):
    pass


class NoBracket(TaperFDAError, ValueError):
    pass


class NoConvergence(TaperFDAError, RuntimeError):
    pass


# fourier / flm
class ResolutionExceeded(TaperFDAError, ValueError):
    pass


class RankDeficient(TaperFDAError, ValueError):
    pass


class InsufficientDF(TaperFDAError, ValueError):
    pass


class LengthMismatch(TaperFDAError, ValueError):
    pass


class EmptyGroup(TaperFDAError, ValueError):
    pass


class DegenerateHypothesis(TaperFDAError, ValueError):
    pass


# teststats
class InvalidWeight(TaperFDAError, ValueError):
    pass


class NotMonotone(TaperFDAError, ValueError):
    pass


class UnsupportedNu(TaperFDAError, ValueError):
    pass


class InvalidPosition(TaperFDAError, ValueError):
    pass


class InsufficientP(TaperFDAError, ValueError):
    pass


class MissingCutoff(TaperFDAError, KeyError):
    pass


# montecarlo / simstudy / rates
class EmptySample(TaperFDAError, ValueError):
    pass


class AllZeroGamma(TaperFDAError, ValueError):
    pass


class IndexOutOfRange(TaperFDAError, IndexError):
    pass


class InvalidB(TaperFDAError, ValueError):
    pass


class InvalidRule(TaperFDAError, ValueError):
    pass


# io / cli
class DataError(TaperFDAError, ValueError):
    """Problems with an input data file (exit code 2)."""


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonMonotoneTime(DataError):
    pass


class EmptyFile(DataError):
    pass


class InvalidConfig(TaperFDAError, ValueError):
    """Aggregated configuration problems; ``violations`` lists each one."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.violations))

"""Error hierarchy shared by every palm_extremes module."""


class PalmExtremesError(Exception):
    """Base class of all library errors."""


class PreconditionViolation(PalmExtremesError, ValueError):
    """An argument is outside the documented domain of an operation."""


class DegenerateTriangle(PalmExtremesError):
    pass


class TooFewPoints(PalmExtremesError):
    pass


class DegenerateConfiguration(PalmExtremesError):
    pass


class WindowExcludesOrigin(PalmExtremesError):
    pass


class RadicandNegative(PalmExtremesError):
    pass


class BelowFormulaRegime(PalmExtremesError):
    pass


class NoRootInBracket(PalmExtremesError):
    pass


class GuardTooSmall(PalmExtremesError):
    """A statistic would see points outside the sampled region."""


class TooLarge(PalmExtremesError):
    pass


class SizeMismatch(PalmExtremesError):
    pass


class CutoffTooSmall(PalmExtremesError):
    pass


class StudyFailed(PalmExtremesError):
    """A replication raised; `partial` holds the report of the finished ones."""

    def __init__(self, message, partial=None):
        super(StudyFailed, self).__init__(message)
        self.partial = partial

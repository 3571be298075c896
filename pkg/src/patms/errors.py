"""Exception types raised across the package."""


class PatmsError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(PatmsError, ValueError):
    pass


class NonNegligibleImaginaryPart(PatmsError, ArithmeticError):
    pass


class GridTooLarge(PatmsError, ValueError):
    pass


class ScaleOutOfRange(PatmsError, ValueError):
    pass


class QuadratureNotConverged(PatmsError, ArithmeticError):
    pass


class FrameDegenerateAtFrequency(PatmsError, ArithmeticError):
    """The frame denominator vanishes (numerically) on some frequency nodes.

    ``nodes`` holds the centered frequency indices ``(k0, k1)`` of the
    offending nodes.
    """

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class FilterSupportExceedsPadding(PatmsError, ValueError):
    pass


class NotDivisible(PatmsError, ValueError):
    pass


class NegativeThreshold(PatmsError, ValueError):
    pass


class FeatureOutsideSupport(PatmsError, ValueError):
    pass


class ZeroTruth(PatmsError, ValueError):
    pass


class ArrayFileError(PatmsError, OSError):
    pass

"""Exception hierarchy.

Data problems (bad input, bad configuration) derive from :class:`DataError`;
numeric guards that refuse to produce an unreliable number derive from
:class:`NumericGuard`. The CLI maps the two families to different exit codes.
"""


class GinifieldError(Exception):
    """Base class for every error raised by the package."""


class DataError(GinifieldError, ValueError):
    pass


class NumericGuard(GinifieldError, ArithmeticError):
    pass


class EmptySample(DataError):
    pass


class NonPositiveValue(DataError):
    def __init__(self, index, value, what="index"):
        self.index = index
        self.value = value
        super().__init__(f"non-positive value {value!r} at {what} {index}")


class OutOfRange(DataError):
    pass


class SampleTooSmall(DataError):
    pass


class LengthMismatch(DataError):
    pass


class ConfigError(DataError):
    pass


class MissingResidualFunctions(ConfigError):
    pass


class BadParameters(DataError):
    pass


class MissingColumn(DataError):
    pass


class EmptyAfterFilter(DataError):
    pass


class ZeroMean(NumericGuard):
    pass


class ZeroNormalizer(NumericGuard):
    pass


class NearZeroDenominator(NumericGuard):
    pass


class NegativeVariance(NumericGuard):
    pass


class NonIntegrable(NumericGuard):
    pass

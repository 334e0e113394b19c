"""Exception hierarchy.

Data problems derive from :class:`DataError`, numerical ones from
:class:`NumericalError`; the CLI maps these to distinct exit codes.
"""


class PalmError(Exception):
    """Base class for all package errors."""


class DataError(PalmError, ValueError):
    pass


class UnsupportedFormat(DataError):
    pass


class DimensionNotMultipleOf16(DataError):
    pass


class InvalidDimensions(DataError):
    pass


class InvalidParameter(PalmError, ValueError):
    pass


class MissingSpectrum(DataError):
    pass


class RaggedDataset(DataError):
    pass


class InvalidSplit(DataError):
    pass


class WrongBlockSize(PalmError, ValueError):
    pass


class UnsupportedDepth(PalmError, ValueError):
    pass


class CountOutOfRange(PalmError, ValueError):
    pass


class TooFewSamples(DataError):
    pass


class LengthMismatch(PalmError, ValueError):
    pass


class DimensionMismatch(PalmError, ValueError):
    pass


class EmptyGallery(DataError):
    pass


class BadWeights(PalmError, ValueError):
    pass


class NumericalError(PalmError, ArithmeticError):
    pass


class KOutOfRange(PalmError, ValueError):
    pass


class DegenerateSpectrum(NumericalError):
    pass

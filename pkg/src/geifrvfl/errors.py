"""Exception types raised across the package.

Every error derives from :class:`GEIFRVFLError` (itself a ``ValueError``) so
callers can catch the whole family at once. The CLI maps the three groups
below onto distinct exit codes.
"""


class GEIFRVFLError(ValueError):
    pass


# -- dataset / input problems (CLI exit 3) ---------------------------------

class DatasetError(GEIFRVFLError):
    pass


class MissingHeader(DatasetError):
    pass


class ArityMismatch(DatasetError):
    pass


class UnknownClassLabel(DatasetError):
    pass


class NonNumericFeature(DatasetError):
    pass


class TooFewSamplesPerClass(DatasetError):
    pass


class SingleClass(DatasetError):
    pass


class EmptyClass(DatasetError):
    pass


class PositiveNotMinority(DatasetError):
    pass


class EmptyClassInTest(DatasetError):
    pass


# -- configuration / contract problems (CLI exit 2) ------------------------

class ConfigError(GEIFRVFLError):
    pass


class InvalidWidth(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class NonPositiveMu(ConfigError):
    pass


class NonPositiveSigma(ConfigError):
    pass


class NotSquare(ConfigError):
    pass


class NotSymmetric(ConfigError):
    pass


class ConfigMismatch(ConfigError):
    pass


class NonFinite(ConfigError):
    pass


class DegenerateInputs(ConfigError):
    pass


class UnsupportedD(ConfigError):
    pass


class ModelFormatError(ConfigError):
    pass


# -- numerical failures (CLI exit 4) ---------------------------------------

class NumericalFailure(GEIFRVFLError):
    pass


class SingularPenalty(NumericalFailure):
    pass

"""Exception types raised across the toolkit.

The CLI maps these onto exit codes: ``ConfigError`` -> 1, ``InputError`` -> 2,
``DegenerateDataError`` -> 3.
"""


class SignedEgoError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SignedEgoError, ValueError):
    pass


class InputError(SignedEgoError, ValueError):
    pass


class DegenerateDataError(SignedEgoError, ValueError):
    pass


# ingest
class MalformedRecord(InputError):
    pass


class UnknownKind(MalformedRecord):
    pass


class MissingField(MalformedRecord):
    pass


class MalformedInput(InputError):
    """Too large a share of the stream failed to parse."""


class NonMonotonicTimestampWarning(UserWarning):
    pass


# sentiment
class EmptyLexicon(ConfigError):
    pass


# signing
class NoInteractions(InputError):
    pass


class KeyMismatch(InputError):
    pass


# egonet
class ZeroSpan(DegenerateDataError):
    pass


class DegenerateBandwidth(ConfigError):
    pass


# triads
class DegenerateSigns(DegenerateDataError):
    pass


class NoTriangles(DegenerateDataError):
    pass


# analytics
class EmptyDataset(DegenerateDataError):
    pass


class NoFiveCircleEgos(DegenerateDataError):
    pass


class EmptyActiveNetwork(DegenerateDataError):
    pass


class TooFewEgos(DegenerateDataError):
    pass


class ConstantSeries(DegenerateDataError):
    pass

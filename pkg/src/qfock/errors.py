"""Exception types raised across the package."""


class QFockError(ValueError):
    """Base class for all domain errors."""


class NotUnimodular(QFockError):
    pass


class InvalidKernel(QFockError):
    pass


class IndexOutOfRange(QFockError):
    pass


class NotSymmetric(QFockError):
    pass


class BadRoot(QFockError):
    pass


class CutoffTooSmall(QFockError):
    pass


class BosonCase(QFockError):
    pass


class WordTooLong(QFockError):
    pass


class RangeError(QFockError):
    pass


class SupportOverlap(QFockError):
    pass


class DegenerateMeasure(QFockError):
    pass


class NotGroupSymmetric(QFockError):
    pass


class EnvelopeExceeded(QFockError):
    """A requested size is outside the supported dense-tensor envelope."""


class ConfigError(QFockError):
    pass

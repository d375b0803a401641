# app/core/errors.py


class MerminError(ValueError):
    """Base class for every domain error raised by the services."""


class InvalidSettingError(MerminError):
    pass


class InvalidDistributionError(MerminError):
    pass


class UnknownRelationError(MerminError):
    pass


class MalformedDomainError(MerminError):
    pass


class InconsistentTallyError(MerminError):
    """Raised when a tally could not have been produced by G9 vectors."""


class HullQueryError(MerminError):
    pass


class UndefinedRatioError(MerminError):
    pass


class InvalidOutcomeError(MerminError):
    pass


class InvalidRunParameterError(MerminError):
    """Seeds, trial counts and chunk sizes outside their allowed ranges."""

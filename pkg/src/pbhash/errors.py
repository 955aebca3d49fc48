"""Exception hierarchy. The CLI maps every :class:`PbHashError` to exit code 1."""


class PbHashError(Exception):
    """Base class for all domain errors raised by this package."""


class ConfigurationError(PbHashError, ValueError):
    """Inconsistent or out-of-range parameters."""


class DomainError(PbHashError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UndefinedSimilarityError(PbHashError, ValueError):
    """Jaccard similarity requested for two empty vectors."""


class UndefinedHashError(PbHashError, ValueError):
    """A sketch was requested for a vector with no non-zero entries."""


class ComparabilityError(PbHashError, ValueError):
    """Two sketches were produced under different schemes or seeds."""


class ResourceLimitError(PbHashError, ValueError):
    """The request exceeds a documented size envelope."""


class InputFormatError(PbHashError, ValueError):
    """Malformed text input."""

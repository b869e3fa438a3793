"""Exception hierarchy shared across the package.

Usage errors (bad arguments, bad config) are plain ValueError; everything
that maps to a CLI exit code lives here.
"""


class QaError(Exception):
    """Base class for all package-specific errors."""


class DataError(QaError):
    """Input data is missing, unreadable, or violates a documented schema."""


class ExternalServiceError(QaError):
    """A remote embedding or reader service failed."""


class TransportError(ExternalServiceError):
    """Network-level failure that persisted across the configured retries."""


class ProtocolError(ExternalServiceError):
    """The service answered, but the payload violates the wire contract."""


class ProviderError(ExternalServiceError):
    """The embedding provider returned an unusable response."""

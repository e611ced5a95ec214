"""Exception types raised across the package."""


class HybridLinkError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HybridLinkError, ValueError):
    """Invalid parameters, unknown presets or inconsistent link settings."""


class FramingError(HybridLinkError, ValueError):
    """Buffer lengths that do not match the expected frame geometry."""


class DomainError(HybridLinkError, ValueError):
    """Numeric input outside the domain of an operation."""


class PreconditionError(HybridLinkError, RuntimeError):
    """An operation was called without the inputs it depends on."""

"""Exception hierarchy shared by every module."""


class DualConnError(Exception):
    """Base class for all package errors."""


class DomainError(DualConnError, ValueError):
    """An input lies outside the domain of the operation."""


class DegenerateIndicatorError(DomainError):
    """A failure indicator has zero variance, so its correlation is undefined."""


class ConfigError(DomainError):
    """A scenario document is malformed; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UsageError(DualConnError, ValueError):
    """An operation was called on a scenario it does not apply to."""


class FeasibilityError(DualConnError, ValueError):
    """A correlation is outside the Fréchet bounds implied by the marginals."""

    def __init__(self, message, bound=None):
        self.bound = bound
        super().__init__(message)

"""Exception types raised across the package."""


class SubsidyBanditError(Exception):
    """Base class for all package errors."""


class InvalidInstanceError(SubsidyBanditError, ValueError):
    """An arm or instance violates its invariants."""


class InvalidParametersError(SubsidyBanditError, ValueError):
    """Instance-constructor parameters are out of range."""


class ConfigurationError(SubsidyBanditError, ValueError):
    """A policy, experiment config or policy/instance pairing is invalid."""


class SequencingError(SubsidyBanditError):
    """Ledger records arrived out of round order."""


class ProtocolError(SubsidyBanditError):
    """An inner policy broke the reduction protocol."""


class FactoryExhaustedError(SubsidyBanditError):
    """A finite coin source ran dry before the factory terminated."""

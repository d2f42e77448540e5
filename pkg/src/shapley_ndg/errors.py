"""Exception hierarchy shared by all modules."""


class GameError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GameError, ValueError):
    """An instance, profile or parameter violates its invariants."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class InstanceError(ValidationError):
    pass


class ProfileError(ValidationError):
    pass


class DomainError(GameError, ValueError):
    """An argument lies outside the domain of an operation."""


class NoPathError(GameError):
    """A sink is unreachable from its source."""


class BoundsNotApplicableError(GameError):
    """Theoretical bounds need ``min_i w_i == 1`` and at least two players."""


class TooLargeError(GameError):
    """Exhaustive enumeration would exceed the configured cap."""

    def __init__(self, message, measured=None, cap=None):
        super().__init__(message)
        self.measured = measured
        self.cap = cap


class SpecError(ValidationError):
    """A distribution or topology description is malformed."""


class OracleDisagreementError(GameError, AssertionError):
    """The shortest-path best response disagrees with exhaustive enumeration."""


class NormalizationWarning(UserWarning):
    """Player weights are not normalized to ``min_i w_i == 1``."""

"""Exception hierarchy shared by every module of the package."""


class ObsLearnError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(ObsLearnError, ValueError):
    """An argument is non-finite, out of range or otherwise malformed."""


class DegenerateSupportError(ObsLearnError, ArithmeticError):
    """A conditioning set carries no usable probability mass."""


class NoSignChangeError(ObsLearnError, ArithmeticError):
    """Bracket expansion failed: the expectation never changes sign."""


class OffPathError(ObsLearnError):
    """An observed move has zero probability under the presumed strategy."""


class NonIntervalBeliefError(ObsLearnError):
    """A belief update would produce a set that is not a single interval."""


class IncompleteStrategyError(ObsLearnError, KeyError):
    """A history-indexed strategy has no entry for a reachable history."""


class PreconditionError(ObsLearnError):
    """An operation was called outside the regime it is defined for."""


class NotAsymmetricError(PreconditionError):
    """The asymmetry condition fails, so the deviation construction is void."""


class NonTerminationError(ObsLearnError, RuntimeError):
    """An iteration exceeded its configured cap."""


class ConfigError(ObsLearnError, ValueError):
    """The experiment configuration failed validation."""

"""Exception types shared across the package."""


class BlottoLabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BlottoLabError, ValueError):
    """A value is outside the legal domain (negative allocation, K = 0, ...)."""


class DimensionMismatch(BlottoLabError, ValueError):
    """Two structures that must agree on battlefield count do not."""


class EmptySupport(BlottoLabError, ValueError):
    """An operation needs a nonempty decision set or distribution and got none."""


class UnsupportedFeedback(BlottoLabError, ValueError):
    """The feedback mode does not carry the information the operation needs."""


class InfeasibleFeedback(BlottoLabError, RuntimeError):
    """Feedback admits no opponent decision at all.

    Genuine play can never produce this; it signals an internal
    inconsistency (or hand-crafted impossible inputs), so it is not a
    plain ValueError.
    """


class StrategyFault(BlottoLabError, RuntimeError):
    """A strategy returned a decision that is invalid for its player."""


class ConfigError(BlottoLabError, ValueError):
    """A run configuration is malformed or self-contradictory."""

"""Exception types shared across the package."""


class BidiscError(Exception):
    """Base class for all domain errors raised by this package."""


class DominationError(BidiscError):
    """A shift/frequency does not dominate the exponents it must cover."""


class CollisionError(BidiscError):
    """Two construction branches produced the same exponent pair."""


class AntiDerivativeError(BidiscError):
    """An inverse Euler operator met a term with first exponent zero."""


class EmptyInput(BidiscError, ValueError):
    """An operation that needs at least one element received none."""


class BaseOverflow(BidiscError):
    """The frequency generator exceeded its maximum base without passing."""


class EnumTooLarge(BidiscError):
    """Subset enumeration was requested beyond the configured limit."""


class ModeError(BidiscError):
    """An operation requiring a specific schedule mode got another one."""


class ChainViolation(BidiscError):
    """The certified bound chain failed its internal consistency check."""


class FileFormatError(BidiscError, ValueError):
    """A certificate, bundle or schedule file could not be parsed."""

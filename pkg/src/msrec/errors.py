"""Exception hierarchy shared across the package."""


class MsrecError(Exception):
    """Base class for all errors raised by this package."""


class InvariantError(MsrecError, ValueError):
    """A domain invariant was violated (bad probability, matrix shape, ...)."""


class MembershipError(InvariantError):
    """A point was prepended to a sequence that already contains it."""


class HorizonError(InvariantError):
    """An origin cost reached or exceeded the horizon cost."""


class StoreMismatchError(InvariantError):
    """A candidate store does not belong to the instance it is used with."""


class MissingLevelError(MsrecError, KeyError):
    """A query requested a sequence length the store was never built for."""


class NoRouteError(MsrecError):
    """No stored candidate satisfies the query (e.g. destination filtered out)."""


class ParseError(MsrecError, ValueError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class VerificationError(MsrecError):
    """An engine result disagreed with the independent oracle."""

"""Exception types raised by srlab."""


class SrlabError(Exception):
    """Base class for library errors."""


class ParameterError(SrlabError, ValueError):
    """An argument is outside the supported range."""


class DomainError(SrlabError, ValueError):
    """A point lies outside the domain of a function or measure."""


class SizeError(SrlabError, ValueError):
    """An enumeration or index set would exceed its configured cap."""


class CapExceededError(SizeError):
    """Exhaustive subset enumeration is too large; use the audit/greedy mode."""

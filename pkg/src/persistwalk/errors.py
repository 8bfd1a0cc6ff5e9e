"""Exception hierarchy shared across the library.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class PersistwalkError(Exception):
    """Base class for all library errors."""


class DomainError(PersistwalkError, ValueError):
    """A parameter or state is outside the mathematically valid domain."""


class NoInvariantMeasureError(DomainError):
    """Raised when an invariant probability measure does not exist
    (some expected run length diverges)."""


class ConvergenceError(PersistwalkError, RuntimeError):
    """An iterative numerical procedure failed to reach its tolerance."""


class TailNotCertifiedError(ConvergenceError):
    """A series was truncated without a certified bound on the tail."""


class ConfigError(PersistwalkError, ValueError):
    """A configuration file or parameter string could not be parsed."""

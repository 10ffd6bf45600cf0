"""Exception hierarchy shared by every module."""


class SummaError(Exception):
    """Base class for all library errors."""


class DomainError(SummaError, ValueError):
    """Invalid parameters or indices (eps <= 0, n < 1, bad set parameters)."""


class ExpressionOutOfRange(SummaError, ValueError):
    """A tail expression evaluated outside [0, 1] or to a non-finite value."""


class InvalidLacunary(DomainError):
    """Lacunary terms are not strictly increasing, or requested out of range."""


class EnumerationCapExceeded(SummaError):
    """A computation would need enumeration beyond the configured cap."""


class MonotonicityViolated(SummaError):
    """A tail declared monotone in k was observed to increase."""


class InsufficientData(SummaError):
    """Too few usable samples to fit a slope or classify a profile."""


class UnknownCheckId(SummaError, KeyError):
    pass


class MissingSeparationDeclaration(SummaError):
    pass


class LacunaryWarning(UserWarning):
    """h_r decreased somewhere in the inspected range (advisory only)."""

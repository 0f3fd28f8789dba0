"""Exception hierarchy shared by every module."""

from __future__ import annotations


class KGraphError(Exception):
    """Base class for all library errors."""


class MalformedSkeleton(KGraphError):
    pass


class NotComposable(KGraphError):
    pass


class DegreeMismatch(KGraphError):
    pass


class BoundExceeded(KGraphError):
    pass


class TableDomainExceeded(KGraphError):
    pass


class BadNormalization(KGraphError):
    pass


class ApproximateModeUnsupported(KGraphError):
    pass


class MixedModeError(KGraphError):
    """Exact and floating circle values were combined without promotion."""


class OffGrid(KGraphError):
    pass


class OutOfRange(KGraphError):
    pass


class EmptyWindow(KGraphError):
    pass


class WindowEscape(KGraphError):
    pass


class InsufficientDepth(KGraphError):
    pass


class CertificateMeetError(KGraphError):
    """Valid shift certificates of an element are not closed under meets."""


class CocycleInvalid(KGraphError):
    pass


class GridMismatch(KGraphError):
    pass


class NotCoboundaryDegree(KGraphError):
    pass


class ParseError(KGraphError):
    pass

from typing import Any


class DpQuotientError(Exception):
    """Base class for every error raised by dpquotient"""


class LatticeError(DpQuotientError, ValueError):
    """Raised when lattice data fails a structural check"""


class DisjointnessViolation(LatticeError):
    """A contraction request contained classes that are not disjoint (-1)-classes.

    Attributes:
        pair: the two offending classes, rendered as text. For a class that is not a
            (-1)-class the pair holds the class twice.
        product: the intersection number found for the pair
    """

    def __init__(self, pair: tuple[str, str], product: int, message: str):
        super().__init__(message)
        self.pair = pair
        self.product = product


class InvalidRoot(LatticeError):
    pass


class NotAnIsometry(LatticeError):
    pass


class CapExceeded(DpQuotientError, RuntimeError):
    """The closure grew beyond the configured element cap"""

    def __init__(self, cap: int):
        super().__init__(
            f"Group closure exceeded the cap of {cap} elements. "
            f"Raise the cap (e.g. `--cap {cap * 2}`) to enumerate larger groups."
        )
        self.cap = cap


class SearchExhausted(DpQuotientError, RuntimeError):
    pass


class UnknownScenario(DpQuotientError, ValueError):
    pass


class InconsistentDescriptor(DpQuotientError, ValueError):
    pass


class PreconditionFailed(DpQuotientError, ValueError):
    pass


class UnsupportedRegime(DpQuotientError, ValueError):
    pass


class Impossible(DpQuotientError):
    """A verdict-matrix cell that cannot be realised by any surface and group"""

    def __init__(self, reason: str, **details: Any):
        super().__init__(reason)
        self.reason = reason
        self.details = details


class RepeatedRoots(DpQuotientError, ValueError):
    pass


class ParseError(DpQuotientError, ValueError):
    pass


class CertificateMismatch(DpQuotientError):
    """A freshly computed certificate differs from the one pinned in the store"""

    def __init__(self, kind: str, key: str):
        super().__init__(
            f"Certificate {kind}/{key} differs from the copy pinned in the store. "
            f"Delete the stored copy to pin the new one."
        )
        self.kind = kind
        self.key = key

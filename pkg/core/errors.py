"""Exception hierarchy for the toolkit."""

from typing import Optional


class AlgebraError(Exception):
    """Base class for every error raised by the core package."""
    pass


class LinearAlgebraError(AlgebraError):
    pass


class RingFormatError(AlgebraError):
    """A ring file that does not follow the schema."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class RingValidationError(AlgebraError):
    """A ring that violates one of the ring invariants."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class DegenerateCubicError(RingValidationError):
    """The cubic form on H^2 has a kernel vector; carries it as ``witness``."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"degenerate cubic form, kernel vector {list(witness)}")


class UnsupportedRingError(AlgebraError):
    pass


class TruncationError(AlgebraError):
    pass


class DerivationError(AlgebraError):
    pass


class FiltrationError(DerivationError):
    pass


class TorelliError(DerivationError):
    pass


class HardLefschetzError(AlgebraError):
    pass


class CompleteIntersectionError(AlgebraError):
    pass


class ResourceLimitError(AlgebraError):
    """Refusal of a computation whose estimated basis exceeds the configured cap."""

    def __init__(self, what: str, estimate: int, cap: int, affordable: Optional[int] = None):
        self.estimate = estimate
        self.cap = cap
        self.affordable = affordable
        message = f"{what}: estimated {estimate} basis elements exceeds cap {cap}"
        if affordable is not None:
            message += f"; largest affordable truncation is {affordable}"
        super().__init__(message)


class InternalConsistencyError(AlgebraError):
    pass

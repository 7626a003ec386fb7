"""Exception types shared across the toolkit."""


class TritangleError(Exception):
    """Base class for all toolkit errors."""


class InvalidState(TritangleError):
    """State vector or density matrix violates a structural invariant."""


class DimensionError(TritangleError):
    """Shape, length, or index is incompatible with the operation."""


class InvalidBasis(TritangleError):
    """Basis matrix is not unitary within tolerance."""


class NumericError(TritangleError):
    """Input is numerically unusable (non-finite, or PSD violated too badly)."""


class NotSymmetric(TritangleError):
    """Matrix handed to the Takagi factorization is not complex symmetric."""


class DomainError(TritangleError):
    """Scalar parameter outside its admissible range."""


class DegenerateDeviation(TritangleError):
    """Deviation vector is parallel to the reference state after projection."""


class InternalInconsistency(TritangleError):
    """Independent computation routes disagree; signals a bug, never averaged."""

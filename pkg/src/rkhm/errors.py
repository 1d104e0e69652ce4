"""Exception hierarchy shared by all rkhm modules."""


class RkhmError(Exception):
    """Base class for all library errors."""


class NonFinite(RkhmError):
    """An input or result contains NaN or Inf entries."""


class NonHermitianInput(RkhmError):
    """A matrix required to be Hermitian fails the tolerance check."""


class DimensionMismatch(RkhmError):
    """Shapes of the operands are incompatible."""


class NotStrictlyUpper(RkhmError):
    """A block matrix required to be strictly upper triangular is not."""


class EmptyInput(RkhmError):
    """An operation received an empty collection."""


class NegativeEpsilon(RkhmError):
    """A truncation threshold must be >= 0."""


class AxisOutOfRange(RkhmError):
    """Requested principal-axis index exceeds the fitted rank."""


class AllZeroGram(RkhmError):
    """No Gram eigenvalue exceeds the rank cutoff."""


class InsufficientData(RkhmError):
    """Too few samples for the requested fit."""


class SingularEigvecMatrix(RkhmError):
    """Eigenvector matrix is numerically singular (modal decomposition)."""


class SeriesTooShort(RkhmError):
    """Time series shorter than the requested embedding window."""

"""Exception types shared across the package."""


class TrocapError(Exception):
    """Base class for all package-specific errors."""


class NotHermitian(TrocapError):
    """Matrix fails the hermiticity tolerance."""


class NotPSD(TrocapError):
    """Matrix has a significantly negative eigenvalue."""


class BadExponent(TrocapError):
    """Norm or divergence exponent outside its admissible range."""


class DimMismatch(TrocapError):
    """Operands have incompatible shapes or declared dimensions."""


class NotTracePreserving(TrocapError):
    """Kraus family does not sum to the identity."""


class RankDeficient(TrocapError):
    """Dilation map is not isometric within tolerance."""


class NotTro(TrocapError):
    """Operator space is not closed under the triple product x y* z."""


class NotNormalized(TrocapError):
    """Operator is not a normalized density (unit normalized trace)."""


class NotIndependent(TrocapError):
    """Operator is not (strongly) independent of the reference algebra."""


class InvalidSymbol(TrocapError):
    """Symbol certificate is missing or fails validation."""


class NotState(TrocapError):
    """Matrix is not a density operator (PSD, unit trace)."""


class EmptyBlocks(TrocapError):
    """Block list must contain at least one block."""


class OutOfRange(TrocapError):
    """Scalar parameter outside its admissible interval."""


class HypothesisFailed(TrocapError):
    """Closed-form mode invoked while its structural hypothesis fails."""


class OptimizerFailed(TrocapError):
    """No optimization strategy converged."""


class NotPositiveDefinite(TrocapError):
    """Kernel matrix of the multiplier function is not PSD with unit diagonal."""


class BadDistribution(TrocapError):
    """Weights are not a probability distribution."""

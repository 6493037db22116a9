"""Exception types raised by the numerical kernels."""


class XYCorrError(Exception):
    """Base class for all package errors."""


class QuadratureNotConverged(XYCorrError):
    pass


class InsufficientGTable(XYCorrError, KeyError):
    pass


class NotPositive(XYCorrError, ValueError):
    """A density matrix has an eigenvalue too negative to be a rounding residue."""


class NoFactorization(XYCorrError, ValueError):
    pass


class OptimizerStalled(XYCorrError):
    pass


class DimensionTooLarge(XYCorrError, ValueError):
    pass


class EigensolverFailed(XYCorrError):
    pass


class BadSites(XYCorrError, ValueError):
    pass


class NoCrossingFound(XYCorrError):
    pass


class GridTooCoarse(XYCorrError, ValueError):
    pass


class PeakAtBoundary(XYCorrError):
    """The derivative maximum sits on the edge of the lambda grid."""

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side


class DegenerateFit(XYCorrError, ValueError):
    pass


class PointFailure(XYCorrError):
    """A numeric failure tagged with the parameter point that caused it."""

    def __init__(self, point: dict, cause: Exception):
        self.point = point
        self.cause = cause
        where = ", ".join(f"{k}={v}" for k, v in point.items())
        super().__init__(f"{type(cause).__name__} at {where}: {cause}")

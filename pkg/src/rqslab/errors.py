"""Exception types raised across the package."""


class RQSLError(Exception):
    """Base class for all errors raised by rqslab."""


class DimensionMismatch(RQSLError, ValueError):
    pass


class NotHermitian(RQSLError, ValueError):
    pass


class NonFinite(RQSLError, ValueError):
    pass


class ConvergenceFailure(RQSLError, RuntimeError):
    pass


class ZeroVector(RQSLError, ValueError):
    pass


class NegativeVariance(RQSLError, ArithmeticError):
    """Variance radicand came out clearly negative: a numerical fault."""


class OrthogonalOverlap(RQSLError, ValueError):
    """Overlap with the initial state vanished; the reference section is undefined."""


class DepthExceeded(RQSLError, RuntimeError):
    pass


class ZeroVariance(RQSLError, ValueError):
    """Energy spread is zero, so the speed-limit bound is vacuous (not violated)."""


class NonPositiveKappa(RQSLError, ValueError):
    pass


class InvalidPartition(RQSLError, ValueError):
    pass


class InvalidParameter(RQSLError, ValueError):
    pass

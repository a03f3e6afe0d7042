"""Exception types raised by the numerical pipeline."""


class TwoMatrixError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TwoMatrixError):
    pass


class NumericError(TwoMatrixError):
    """Base class for convergence / conditioning failures."""


class ZeroLeadingCoefficient(NumericError):
    pass


class NonConvergence(NumericError):
    pass


class ModulusDegenerate(NumericError):
    pass


class SeriesCapExceeded(NumericError):
    pass


class PoleProximity(NumericError):
    pass


class EndpointCountMismatch(NumericError):
    pass


class CollisionDetected(NumericError):
    pass


class SeedEscaped(NumericError):
    pass


class QuadratureNotConverged(NumericError):
    pass


class ContourTooTight(NumericError):
    pass


class PathBlocked(NumericError):
    pass


class JacobianSingular(NumericError):
    pass


class LeftDomain(NumericError):
    """Newton iterate left the admissible parameter domain.

    ``last_iterate`` holds the last valid parameters so a continuation driver
    can restart from there.
    """

    def __init__(self, msg, last_iterate=None):
        super().__init__(msg)
        self.last_iterate = last_iterate


class MaxIterations(NumericError):
    def __init__(self, msg, last_iterate=None):
        super().__init__(msg)
        self.last_iterate = last_iterate


class DegenerateEndpoint(NumericError):
    pass


class ThetaZeroHit(NumericError):
    pass


class StepTooLarge(NumericError):
    pass


class RadiusInvalid(NumericError):
    pass


class InconsistentRadii(NumericError):
    pass

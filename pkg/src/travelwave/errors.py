"""Exception hierarchy shared by every module."""


class TravelWaveError(Exception):
    """Base class for all package errors."""


class DomainError(TravelWaveError, ValueError):
    """Inputs outside the admissible parameter or argument domain."""


class UncoveredRegime(TravelWaveError):
    """No asymptotic law is known for the requested (regime, end) pair."""


class IntegrationFailure(TravelWaveError, ArithmeticError):
    """The ODE integrator could not continue (step collapse, sign loss)."""


class BracketStall(TravelWaveError):
    """The regularized bracket stopped shrinking before reaching its tolerance."""

    def __init__(self, message, gap):
        super().__init__(message)
        self.gap = gap


class RangeExceeded(TravelWaveError, ValueError):
    """A query falls outside the computed range of a trajectory or profile."""


class QuadratureFailure(TravelWaveError, ArithmeticError):
    """Adaptive quadrature exceeded its refinement budget."""

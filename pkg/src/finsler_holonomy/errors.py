"""Exception hierarchy shared by the engine modules."""


class FinslerError(Exception):
    """Base class for engine errors."""


class DomainError(FinslerError, ValueError):
    """A program was evaluated outside its chart."""


class DegenerateInputError(FinslerError, ValueError):
    """A tangent vector is too close to zero (the slit tangent bundle excludes 0)."""


class MetricDegeneracyError(FinslerError):
    """The metric tensor failed to be positive definite or invertible."""


class PointwiseFamilyError(FinslerError):
    """An operation needs x-derivatives that a pointwise family does not provide."""


class ChartExitError(FinslerError):
    """An integrated curve left the chart."""

    def __init__(self, message: str, exit_time: float):
        super().__init__(message)
        self.exit_time = exit_time


class StepFailureError(FinslerError):
    """The ODE integrator could not advance."""


class CollapseError(FinslerError):
    """A transported vector collapsed towards zero."""


class UnsupportedFrameError(FinslerError):
    """A plane restriction was requested for a frame that cannot be handled."""


class SamplingError(FinslerError, ValueError):
    """Too few samples, or samples on mismatched grids."""

"""Exception hierarchy shared by every module of the package."""


class AcousticLensError(Exception):
    """Base class for all library errors."""


class DomainError(AcousticLensError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class HorizonCrossingError(DomainError):
    """A radial interval touches or crosses the acoustic horizon."""


class CapturedOrbitError(DomainError):
    """The impact parameter lies in the capture regime, |b| < 2 c0."""


class NoPeakError(DomainError):
    """The effective potential has no maximum (zero angular momentum)."""


class NoLensingSolutionError(AcousticLensError):
    """The thin-lens consistency equation has no root in the search bracket."""


class ConvergenceError(AcousticLensError):
    """A numerical procedure stopped before meeting its tolerance.

    ``error_estimate`` carries the best error estimate achieved and
    ``partial`` whatever partial result was produced (for example the
    trajectory integrated up to the step limit).
    """

    def __init__(self, message, error_estimate=None, partial=None):
        super().__init__(message)
        self.error_estimate = error_estimate
        self.partial = partial

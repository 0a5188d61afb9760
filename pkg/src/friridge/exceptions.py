"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """An argument is outside its admissible range or shapes disagree."""


class IllConditionedKernelError(ValueError):
    """A retained Fourier coefficient of the filter kernel is too small to divide by."""


class DegenerateSystemError(ValueError):
    """A structured linear system (Toeplitz or Vandermonde) is singular."""


class NumericalFailureError(RuntimeError):
    """The polynomial root finder did not converge."""


class PipelineFailureError(RuntimeError):
    """Every frame of a time-frequency representation failed to reconstruct."""

import numpy as np

from .exceptions import InvalidParameterError


def check_signal(x, allow_empty=False):
    """Return ``x`` as a 1-D complex128 array, rejecting NaN/inf and bad shapes."""
    x = np.asarray(x)
    if x.ndim == 2 and 1 in x.shape:
        x = x.ravel()
    if x.ndim != 1:
        raise InvalidParameterError(f"expected a 1-D signal, got shape {x.shape}")
    if x.size == 0 and not allow_empty:
        raise InvalidParameterError("signal has zero length")
    x = x.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("signal contains NaN or inf")
    return x


def check_frequency(f, name="frequency"):
    if not 0.0 < f < 0.5:
        raise InvalidParameterError(f"{name}={f} must lie in (0, 0.5) cycles/sample")
    return float(f)


def check_positive_int(value, name, minimum=1):
    if int(value) != value or value < minimum:
        raise InvalidParameterError(f"{name} must be an integer >= {minimum}, got {value}")
    return int(value)


def check_tfr_matrix(values, n_bins=None):
    values = np.asarray(values)
    if values.ndim != 2:
        raise InvalidParameterError(f"expected an (N, M) matrix, got shape {values.shape}")
    if n_bins is not None and values.shape[1] != n_bins:
        raise InvalidParameterError(
            f"matrix has {values.shape[1]} frequency bins, config expects {n_bins}"
        )
    return values

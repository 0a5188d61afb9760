"""Instantaneous-frequency ridge estimation by finite-rate-of-innovation
reconstruction of spectrogram columns."""

from .estimators import FRIRidgeEstimator, analyze
from .exceptions import (
    DegenerateSystemError,
    IllConditionedKernelError,
    InvalidParameterError,
    NumericalFailureError,
    PipelineFailureError,
)
from .fri import build_kernel, build_sst_kernel, recover_frame
from .modes import build_mask, extract_mode, rqf
from .ridges import estimate_ridges, rmae, rmse
from .signals import add_noise, make_linear_chirp, make_sin_fm, make_sinusoid, synthesize
from .tfr import AnalysisConfig, inverse_stft, spectrogram, stft, vsst

__version__ = "0.1.0"

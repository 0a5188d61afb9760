"""Scikit-learn style front end for FRI ridge estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_positive_int, check_signal
from .exceptions import InvalidParameterError
from .fri import FilterKernel, build_kernel, build_sst_kernel
from .modes import build_mask, extract_mode
from .ridges import RidgeTrajectories, estimate_ridges, rmse
from .signals import Signal
from .tfr import AnalysisConfig, StftMatrix, spectrogram, stft, vsst

# method name -> (time-frequency representation, annihilating filter)
METHODS = {
    "fri": ("spectrogram", "prony"),
    "fri-tls": ("spectrogram", "tls"),
    "fri-sst": ("vsst", "tls"),
}


@dataclass(frozen=True, eq=False)
class Analysis:
    stft: StftMatrix
    tfr: object
    kernel: FilterKernel
    ridges: RidgeTrajectories


def analyze(
    signal,
    K,
    method="fri-tls",
    config: AnalysisConfig = AnalysisConfig(),
    sst_std=0.5,
    sst_spread=0.5,
    keep_diagnostics=False,
) -> Analysis:
    """Run one of the three estimators end to end on a single signal."""
    if method not in METHODS:
        raise InvalidParameterError(f"method must be one of {sorted(METHODS)}, got {method!r}")
    K = check_positive_int(K, "K")
    x = signal if isinstance(signal, Signal) else Signal(signal)
    F = stft(x, config)
    representation, solver = METHODS[method]
    if representation == "vsst":
        tfr = vsst(x, config, spread=sst_spread)
        kernel = build_sst_kernel(sst_std, config)
    else:
        tfr = spectrogram(F)
        kernel = build_kernel(config)
    ridges = estimate_ridges(tfr, K, solver, kernel, keep_diagnostics=keep_diagnostics)
    return Analysis(F, tfr, kernel, ridges)


class FRIRidgeEstimator(TransformerMixin, BaseEstimator):
    """Instantaneous-frequency ridges of a K-component signal.

    ``fit`` analyses one complex signal; ``transform`` returns its ridges as a
    ``(n_components, N)`` array of normalized frequencies (cycles/sample).

    Parameters
    ----------
    n_components : int
        Number of modes K, assumed known.
    method : {"fri", "fri-tls", "fri-sst"}
        Prony or total least squares on the spectrogram, or total least
        squares on the synchrosqueezed representation.
    L, M, M0, window_halfwidth
        Analysis window spread, frequency bins, bandlimit (None = automatic)
        and window truncation (None = ceil(4 L)).
    sst_std, sst_spread
        Kernel width and reassignment spread (bins) for ``fri-sst``.
    halfwidth : int
        Mask half-width used by :meth:`extract_modes`.
    """

    def __init__(
        self,
        n_components=3,
        method="fri-tls",
        L=20.0,
        M=500,
        M0=None,
        window_halfwidth=None,
        sst_std=0.5,
        sst_spread=0.5,
        halfwidth=10,
    ):
        self.n_components = n_components
        self.method = method
        self.L = L
        self.M = M
        self.M0 = M0
        self.window_halfwidth = window_halfwidth
        self.sst_std = sst_std
        self.sst_spread = sst_spread
        self.halfwidth = halfwidth

    def _config(self):
        return AnalysisConfig(L=self.L, M=self.M, window_halfwidth=self.window_halfwidth, M0=self.M0)

    def _analyze(self, X):
        x = check_signal(getattr(X, "samples", X))
        return analyze(
            x, self.n_components, self.method, self._config(), self.sst_std, self.sst_spread
        )

    def fit(self, X, y=None):
        x = check_signal(getattr(X, "samples", X))
        result = self._analyze(x)
        self.samples_ = x
        self.config_ = result.stft.config
        self.stft_ = result.stft
        self.kernel_ = result.kernel
        self.ridges_ = result.ridges
        self.n_samples_ = x.shape[0]
        return self

    def _check_fitted(self):
        if not hasattr(self, "ridges_"):
            raise NotFittedError("call fit before using this estimator")

    def transform(self, X):
        self._check_fitted()
        x = check_signal(getattr(X, "samples", X))
        if np.array_equal(x, self.samples_):
            return self.ridges_.if_normalized
        return self._analyze(x).ridges.if_normalized

    def predict(self, X):
        return self.transform(X)

    def extract_modes(self):
        """Modes of the fitted signal, masked around each ridge; ``(K, N)`` complex."""
        self._check_fitted()
        masks = build_mask(self.ridges_, self.halfwidth)
        return np.array([extract_mode(self.stft_, m).samples for m in masks])

    def score(self, X, y):
        """Negative ridge RMSE against ``y``, the true normalized IF ``(K, N)``."""
        est = self.transform(X) * self.M
        return -rmse(est, np.asarray(y) * self.M, self.M)

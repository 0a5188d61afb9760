"""Recovery of a stream of Dirac pulses from one filtered time-frequency column.

A column ``s[m] = sum_k a_k g(m - p_k)`` has Fourier-series coefficients
``s_hat(lam) = g_hat(lam) * f_hat(lam)`` with ``f_hat(lam) = sum_k a_k u_k**lam``
and ``u_k = exp(-2j pi p_k / M)``. Dividing out the kernel leaves a sum of
exponentials, whose nodes are the roots of an annihilating filter ``h``::

    sum_i h[i] f_hat(l - i) == 0

``h`` comes either from the square Yule-Walker system with ``h[0] = 1``
(Prony) or from the smallest right singular vector of the tall convolution
matrix (total least squares).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import (
    DegenerateSystemError,
    IllConditionedKernelError,
    InvalidParameterError,
    NumericalFailureError,
)
from .tfr import AnalysisConfig

#: relative kernel magnitude kept by the automatic bandlimit
M0_CUTOFF = 1e-6
#: below this relative magnitude a kernel coefficient cannot be divided out
KERNEL_FLOOR = 1e-12
#: Toeplitz systems with singular-value ratio below this are treated as singular
RCOND = 1e-12
#: minimum separation (bins) between two distinct Dirac positions
MIN_SEPARATION = 1e-6

METHODS = ("prony", "tls")


@dataclass(frozen=True, eq=False)
class FilterKernel:
    """Sampled kernel ``g`` on the M-periodic grid and its retained coefficients.

    ``g_hat[i]`` holds ``g_hat(lam)`` for ``lam = i - M0``. ``profile`` maps a
    wrapped bin distance to the kernel value, for off-grid synthesis.
    """

    g_samples: np.ndarray
    g_hat: np.ndarray
    M0: int
    profile: Callable = field(repr=False)
    name: str = "gaussian"

    @property
    def M(self) -> int:
        return self.g_samples.shape[0]

    @property
    def lambdas(self) -> np.ndarray:
        return np.arange(-self.M0, self.M0 + 1)

    @property
    def D_g(self) -> np.ndarray:
        return np.diag(self.g_hat)

    def shifted(self, position) -> np.ndarray:
        """The kernel centred at a (possibly fractional) bin position."""
        return self.profile(_wrapped_distance(np.arange(self.M) - position, self.M))


def _wrapped_distance(d, M):
    d = np.mod(d, M)
    return np.minimum(d, M - d)


def _finish_kernel(profile, config: AnalysisConfig, name):
    M = config.M
    g = profile(_wrapped_distance(np.arange(M), M))
    full = np.fft.fft(g) / M
    ref = abs(full[0])
    if config.M0 is not None:
        M0 = config.M0
    else:
        M0 = config.max_m0
        rel = np.abs(full[1 : config.max_m0 + 1]) / ref
        weak = np.flatnonzero(rel < M0_CUTOFF)
        if weak.size:
            M0 = max(int(weak[0]), 1)
    lam = np.arange(-M0, M0 + 1)
    g_hat = full[lam % M]
    worst = np.min(np.abs(g_hat)) / ref
    if worst < KERNEL_FLOOR:
        raise IllConditionedKernelError(
            f"kernel coefficient ratio {worst:.2e} below {KERNEL_FLOOR:g} at M0={M0}; use a smaller M0"
        )
    g.setflags(write=False)
    g_hat.setflags(write=False)
    return FilterKernel(g, g_hat, M0, profile, name)


def build_kernel(config: AnalysisConfig = AnalysisConfig()) -> FilterKernel:
    """Squared-magnitude spectrum of the analysis window, ``exp(-(2 pi m L / M)^2)``."""
    c = 2 * np.pi * config.L / config.M
    return _finish_kernel(lambda d: np.exp(-((c * d) ** 2)), config, "spectrogram")


def build_sst_kernel(std_bins=0.5, config: AnalysisConfig = AnalysisConfig()) -> FilterKernel:
    """Unit-peak Gaussian of ``std_bins`` bins, for sharpened representations."""
    if not std_bins > 0:
        raise InvalidParameterError(f"std_bins must be positive, got {std_bins}")
    return _finish_kernel(
        lambda d: np.exp(-(d**2) / (2.0 * std_bins**2)), config, f"sst(std={std_bins})"
    )


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    values: np.ndarray
    frame_index: Optional[int] = None

    @property
    def M0(self) -> int:
        return (self.values.shape[-1] - 1) // 2

    def at(self, lam):
        """``f_hat(lam)`` for integer ``lam`` (scalar or array) in ``[-M0, M0]``."""
        return self.values[..., np.asarray(lam) + self.M0]


@dataclass(frozen=True, eq=False)
class AnnihilatingFilter:
    coefficients: np.ndarray
    method: str

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1


@dataclass(frozen=True, eq=False)
class DiracStream:
    positions: np.ndarray
    weights: np.ndarray
    frame_index: Optional[int] = None
    warned: bool = False


def fourier_coefficients(frame, kernel: FilterKernel, config=None, frame_index=None):
    """``D_g^-1 V^+ s``; ``frame`` may also be an ``(N, M)`` stack of columns.

    ``V`` has orthogonal DFT columns, so its pseudo-inverse is ``V^H / M``
    (the exact inverse when ``M == 2 M0 + 1``).
    """
    s = np.asarray(frame)
    M = kernel.M
    if config is not None and config.M != M:
        raise InvalidParameterError(f"kernel built for M={M}, config has M={config.M}")
    if s.shape[-1] != M:
        raise InvalidParameterError(f"frame length {s.shape[-1]} differs from M={M}")
    spectrum = np.fft.fft(s, axis=-1) / M
    lam = kernel.lambdas
    return FourierCoefficients(spectrum[..., lam % M] / kernel.g_hat, frame_index)


def synthesize_frame(kernel: FilterKernel, positions, weights) -> np.ndarray:
    """Column ``sum_k a_k g(m - p_k)`` sampled exactly from the kernel profile."""
    frame = np.zeros(kernel.M)
    for p, a in zip(np.atleast_1d(positions), np.atleast_1d(weights)):
        frame += a * kernel.shifted(p)
    return frame


def vandermonde(M, M0) -> np.ndarray:
    """``[V]_{m, lam} = exp(2j pi m lam / M)`` for ``lam in [-M0, M0]``."""
    return np.exp(2j * np.pi * np.outer(np.arange(M), np.arange(-M0, M0 + 1)) / M)


def exponential_coefficients(positions, weights, M, M0) -> FourierCoefficients:
    """Closed-form ``f_hat(lam) = sum_k a_k exp(-2j pi lam p_k / M)``."""
    lam = np.arange(-M0, M0 + 1)[:, None]
    u = np.exp(-2j * np.pi * lam * np.atleast_1d(positions)[None, :] / M)
    return FourierCoefficients(u @ np.atleast_1d(np.asarray(weights, dtype=complex)))


def _check_order(coeffs, K):
    if int(K) != K or K < 1:
        raise InvalidParameterError(f"K must be a positive integer, got {K}")
    if coeffs.M0 < K:
        raise InvalidParameterError(
            f"{2 * coeffs.M0 + 1} coefficients cannot determine K={K} pulses (need {2 * K + 1})"
        )


def yule_walker_system(coeffs: FourierCoefficients, K):
    """Square Toeplitz ``A[i, j] = f_hat(i - j)`` and right side ``-f_hat(1..K)``."""
    i = np.arange(K)
    A = coeffs.at(i[:, None] - i[None, :])
    return A, -coeffs.at(i + 1)


def convolution_matrix(coeffs: FourierCoefficients, K) -> np.ndarray:
    """Tall Toeplitz with rows ``[f_hat(l), ..., f_hat(l - K)]``, ``l = K - M0 .. M0``."""
    M0 = coeffs.M0
    l = np.arange(K - M0, M0 + 1)[:, None]
    return coeffs.at(l - np.arange(K + 1)[None, :])


def prony_filter(coeffs: FourierCoefficients, K) -> AnnihilatingFilter:
    _check_order(coeffs, K)
    A, b = yule_walker_system(coeffs, K)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[0] == 0 or sv[-1] < RCOND * sv[0]:
        raise DegenerateSystemError("Yule-Walker matrix is singular (coincident or missing pulses)")
    h = np.concatenate([[1.0 + 0j], np.linalg.solve(A, b)])
    return AnnihilatingFilter(h, "prony")


def tls_filter(coeffs: FourierCoefficients, K) -> AnnihilatingFilter:
    _check_order(coeffs, K)
    A = convolution_matrix(coeffs, K)
    if A.shape[0] < K + 1:
        raise InvalidParameterError(f"only {A.shape[0]} rows for a filter of {K + 1} taps")
    if not np.any(A):
        raise DegenerateSystemError("all Fourier coefficients are zero")
    _, _, vh = np.linalg.svd(A, full_matrices=False)
    h = vh[-1].conj()
    return AnnihilatingFilter(h / np.linalg.norm(h), "tls")


def annihilation_residual(coeffs: FourierCoefficients, h) -> np.ndarray:
    """``(f_hat * h)(l)`` on every index where the full filter fits."""
    h = getattr(h, "coefficients", h)
    return convolution_matrix(coeffs, h.shape[0] - 1) @ h


def _separate(positions, M, tol=MIN_SEPARATION):
    """Nudge near-duplicate positions apart; returns (positions, changed)."""
    positions = np.sort(positions)
    changed = False
    for i in range(1, positions.shape[0]):
        if positions[i] - positions[i - 1] < tol:
            positions[i] = positions[i - 1] + tol
            changed = True
    if positions.shape[0] > 1 and positions[0] + M - positions[-1] < tol:
        positions[0] = np.mod(positions[-1] + tol, M)
        positions = np.sort(positions)
        changed = True
    return positions, changed


def _positions_from_roots(roots, M):
    return np.mod(-M / (2 * np.pi) * np.angle(roots), M)


def roots_to_positions(h, M, K, return_warning=False):
    """Positions (bins, ascending) encoded by the roots of ``H(z)``.

    Roots are projected onto the unit circle; only their arguments matter.
    """
    coeffs = np.asarray(getattr(h, "coefficients", h))
    coeffs = coeffs.astype(np.result_type(coeffs.dtype, np.float64))
    if coeffs.shape[0] != K + 1:
        raise InvalidParameterError(f"filter has degree {coeffs.shape[0] - 1}, expected {K}")
    if coeffs[0] == 0:
        raise DegenerateSystemError("leading filter coefficient is zero")
    try:
        roots = np.roots(coeffs)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"root finding failed: {exc}") from None
    if roots.shape[0] != K or not np.all(np.isfinite(roots)):
        raise NumericalFailureError("root finder returned non-finite or missing roots")
    positions, warned = _separate(_positions_from_roots(roots, M), M)
    if warned:
        warnings.warn("duplicate roots were perturbed apart", RuntimeWarning, stacklevel=2)
    return (positions, warned) if return_warning else positions


def amplitude_system(positions, M, K) -> np.ndarray:
    """``W[p, q] = exp(-2j pi p pos_q / M)`` for ``p, q < K``."""
    return np.exp(-2j * np.pi * np.outer(np.arange(K), np.asarray(positions)) / M)


def solve_amplitudes_complex(coeffs: FourierCoefficients, positions, M, K) -> np.ndarray:
    positions = np.asarray(positions, dtype=float)
    if positions.shape[0] != K:
        raise InvalidParameterError(f"expected {K} positions, got {positions.shape[0]}")
    if K > 1:
        d = _wrapped_distance(positions[:, None] - positions[None, :], M)
        if np.min(d[~np.eye(K, dtype=bool)]) < MIN_SEPARATION:
            raise DegenerateSystemError("positions are too close to separate their weights")
    return np.linalg.solve(amplitude_system(positions, M, K), coeffs.at(np.arange(K)))


def solve_amplitudes(coeffs: FourierCoefficients, positions, M, K) -> np.ndarray:
    """Weights from the K x K Vandermonde system; real part, clamped at zero."""
    return np.maximum(solve_amplitudes_complex(coeffs, positions, M, K).real, 0.0)


def recover_frame(
    frame, kernel: FilterKernel, K, method="tls", config=None, frame_index=None
) -> DiracStream:
    if method not in METHODS:
        raise InvalidParameterError(f"method must be one of {METHODS}, got {method!r}")
    coeffs = fourier_coefficients(frame, kernel, config, frame_index)
    if not np.any(coeffs.values):
        raise DegenerateSystemError("frame carries no energy")
    h = prony_filter(coeffs, K) if method == "prony" else tls_filter(coeffs, K)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        positions, warned = roots_to_positions(h, kernel.M, K, return_warning=True)
    weights = solve_amplitudes(coeffs, positions, kernel.M, K)
    return DiracStream(positions, weights, frame_index, warned)


# --- batched path used over a whole TFR --------------------------------------


@dataclass(frozen=True, eq=False)
class BatchResult:
    positions: np.ndarray  # (N, K), NaN on degenerate frames
    weights: np.ndarray  # (N, K)
    status: np.ndarray  # (N,) of "ok" | "warned" | "degenerate"
    coefficients: Optional[np.ndarray] = None
    filters: Optional[np.ndarray] = None
    roots: Optional[np.ndarray] = None


def _batched_roots(h):
    """Roots of each row's polynomial via companion-matrix eigenvalues."""
    n, taps = h.shape
    K = taps - 1
    comp = np.zeros((n, K, K), dtype=complex)
    comp[:, 0, :] = -h[:, 1:] / h[:, :1]
    if K > 1:
        comp[:, np.arange(1, K), np.arange(K - 1)] = 1.0
    return np.linalg.eigvals(comp)


def recover_frames(tfr_values, kernel: FilterKernel, K, method="tls", keep_diagnostics=False):
    """Vectorized :func:`recover_frame` over the rows of an ``(N, M)`` matrix.

    Frames that would raise in the per-frame path come back with status
    ``"degenerate"`` and NaN positions instead.
    """
    if method not in METHODS:
        raise InvalidParameterError(f"method must be one of {METHODS}, got {method!r}")
    values = np.asarray(tfr_values)
    if values.ndim != 2:
        raise InvalidParameterError(f"expected an (N, M) matrix, got shape {values.shape}")
    coeffs = fourier_coefficients(values, kernel)
    _check_order(coeffs, K)
    N = values.shape[0]
    M = kernel.M
    bad = ~np.any(coeffs.values, axis=1)

    if method == "prony":
        A, b = yule_walker_system(coeffs, K)
        sv = np.linalg.svd(A, compute_uv=False)
        bad |= (sv[:, 0] == 0) | (sv[:, -1] < RCOND * sv[:, 0])
        A = np.where(bad[:, None, None], np.eye(K), A)
        b = np.where(bad[:, None], 0.0, b)
        h = np.concatenate([np.ones((N, 1), complex), np.linalg.solve(A, b[..., None])[..., 0]], 1)
    else:
        A = convolution_matrix(coeffs, K)
        _, _, vh = np.linalg.svd(A, full_matrices=False)
        h = vh[:, -1, :].conj()
        h = h / np.linalg.norm(h, axis=1, keepdims=True)

    bad |= (np.abs(h[:, 0]) == 0) | ~np.all(np.isfinite(h), axis=1)
    safe_h = np.where(bad[:, None], np.eye(1, K + 1, 0, dtype=complex), h)
    safe_h[bad, -1] = -1.0  # placeholder polynomial z^K - 1
    roots = _batched_roots(safe_h)
    bad |= ~np.all(np.isfinite(roots), axis=1)

    positions = np.sort(_positions_from_roots(np.where(bad[:, None], 1.0, roots), M), axis=1)
    status = np.where(bad, "degenerate", "ok").astype(object)
    if K > 1:
        gaps = np.diff(positions, axis=1)
        wrap = positions[:, 0] + M - positions[:, -1]
        close = (np.min(gaps, axis=1) < MIN_SEPARATION) | (wrap < MIN_SEPARATION)
        for i in np.flatnonzero(close & ~bad):
            positions[i], _ = _separate(positions[i], M)
            status[i] = "warned"

    W = np.exp(-2j * np.pi * np.arange(K)[None, :, None] * positions[:, None, :] / M)
    W = np.where(bad[:, None, None], np.eye(K), W)
    rhs = coeffs.at(np.arange(K))
    weights = np.maximum(np.linalg.solve(W, rhs[..., None])[..., 0].real, 0.0)

    positions[bad] = np.nan
    weights[bad] = np.nan
    extra = {}
    if keep_diagnostics:
        extra = dict(coefficients=coeffs.values, filters=h, roots=roots)
    return BatchResult(positions, weights, status.astype(str), **extra)

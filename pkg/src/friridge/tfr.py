"""Gaussian-window STFT, spectrogram, its inverse, and vertical second-order
synchrosqueezing.

Frames are computed at every sample (hop 1). The STFT keeps the absolute
time reference of the Fourier kernel::

    F[n, m] = sum_l x[l] * theta(n - l) * exp(-2j*pi*l*m/M)

so a frame's inverse DFT returns the windowed samples at their own indices
modulo ``M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_signal, check_tfr_matrix
from .exceptions import InvalidParameterError
from .signals import Signal


@dataclass(frozen=True)
class AnalysisConfig:
    """Analysis parameters shared by the transforms and the FRI stage.

    ``M0=None`` lets the kernel pick the bandlimit from its own conditioning;
    ``window_halfwidth=None`` means ``ceil(4 L)``.
    """

    L: float = 20.0
    M: int = 500
    window_halfwidth: Optional[int] = None
    M0: Optional[int] = None

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidParameterError(f"L must be positive, got {self.L}")
        if int(self.M) != self.M or self.M < 2:
            raise InvalidParameterError(f"M must be an integer >= 2, got {self.M}")
        object.__setattr__(self, "M", int(self.M))
        min_hw = math.ceil(4 * self.L)
        if self.window_halfwidth is None:
            object.__setattr__(self, "window_halfwidth", min_hw)
        elif self.window_halfwidth < min_hw:
            raise InvalidParameterError(
                f"window_halfwidth={self.window_halfwidth} is below ceil(4L)={min_hw}"
            )
        if self.M0 is not None:
            if int(self.M0) != self.M0 or not 1 <= self.M0 <= (self.M - 1) // 2:
                raise InvalidParameterError(
                    f"M0 must be an integer in [1, {(self.M - 1) // 2}], got {self.M0}"
                )
            object.__setattr__(self, "M0", int(self.M0))

    @property
    def max_m0(self) -> int:
        return (self.M - 1) // 2


@dataclass(frozen=True, eq=False)
class StftMatrix:
    values: np.ndarray
    config: AnalysisConfig

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class Spectrogram:
    values: np.ndarray
    config: AnalysisConfig

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class SharpenedTfr:
    values: np.ndarray
    config: AnalysisConfig

    @property
    def shape(self):
        return self.values.shape


def gaussian_window(n, L):
    """Unit-area Gaussian ``exp(-n^2 / (2 L^2)) / (sqrt(2 pi) L)``."""
    if not L > 0:
        raise InvalidParameterError(f"L must be positive, got {L}")
    n = np.asarray(n, dtype=float)
    return np.exp(-(n**2) / (2.0 * L**2)) / (math.sqrt(2 * math.pi) * L)


def _as_samples(signal):
    if isinstance(signal, Signal):
        return signal.samples
    return check_signal(signal)


def _windowed_dft(x, taps, M):
    """``sum_l x[l] * taps[l - n] * exp(-2j pi l m / M)`` for every frame n.

    ``taps`` is indexed by the offset ``k = l - n`` in ``[-hw, hw]``.
    """
    N = x.shape[0]
    hw = (taps.shape[0] - 1) // 2
    n = np.arange(N)[:, None]
    k = np.arange(-hw, hw + 1)[None, :]
    l = n + k
    valid = (l >= 0) & (l < N)
    rows = np.broadcast_to(n, l.shape)[valid]
    cols = l[valid] % M
    vals = x[l[valid]] * np.broadcast_to(taps[None, :], l.shape)[valid]
    frames = np.zeros((N, M), dtype=complex)
    if 2 * hw + 1 <= M:
        frames[rows, cols] = vals
    else:
        np.add.at(frames, (rows, cols), vals)
    return np.fft.fft(frames, axis=1)


def _window_taps(config):
    k = np.arange(-config.window_halfwidth, config.window_halfwidth + 1)
    return k, gaussian_window(k, config.L)


def stft(signal, config: AnalysisConfig = AnalysisConfig()) -> StftMatrix:
    x = _as_samples(signal)
    _, theta = _window_taps(config)
    # theta is even, so theta(n - l) == theta(l - n)
    return StftMatrix(_windowed_dft(x, theta, config.M), config)


def spectrogram(F: StftMatrix) -> Spectrogram:
    return Spectrogram(np.abs(F.values) ** 2, F.config)


def inverse_stft(F: StftMatrix, config: Optional[AnalysisConfig] = None) -> Signal:
    """Weighted overlap-add inverse; exact for an unmodified STFT.

    Each frame's inverse DFT gives ``x[l] * theta(n - l)``; these estimates are
    combined in the least-squares sense, ``sum_n theta y_n / sum_n theta^2``.
    """
    if config is not None and config != F.config:
        raise InvalidParameterError(f"config mismatch: {config} vs {F.config}")
    cfg = F.config
    values = check_tfr_matrix(F.values, cfg.M)
    hw = cfg.window_halfwidth
    if 2 * hw + 1 > cfg.M:
        raise InvalidParameterError(
            f"window support {2 * hw + 1} exceeds M={cfg.M}; frames alias and cannot be inverted"
        )
    N = values.shape[0]
    frames = np.fft.ifft(values, axis=1)
    k, theta = _window_taps(cfg)
    n = np.arange(N)[:, None]
    l = n + k[None, :]
    valid = (l >= 0) & (l < N)
    # frame n holds x[l] * theta(n - l) at column l mod M
    y = frames[np.broadcast_to(n, l.shape)[valid], l[valid] % cfg.M]
    w = np.broadcast_to(theta[None, :], l.shape)[valid]
    num = np.bincount(l[valid], weights=(w * y).real, minlength=N) + 1j * np.bincount(
        l[valid], weights=(w * y).imag, minlength=N
    )
    den = np.bincount(l[valid], weights=w * w, minlength=N)
    return Signal(num / den)


def _instantaneous_frequency_2nd_order(x, config):
    """Second-order local IF estimate (cycles/sample) at every (n, m), plus the STFT.

    Uses STFTs with windows theta, t*theta, theta', theta'' and t*theta'.
    """
    M = config.M
    k, theta = _window_taps(config)
    L2 = config.L**2
    d1 = -k / L2 * theta
    d2 = (k**2 / L2**2 - 1.0 / L2) * theta
    F = _windowed_dft(x, theta, M)
    # shift phase reference to the frame centre: V = F * exp(2j pi n m / M)
    N = x.shape[0]
    shift = np.exp(2j * np.pi * np.outer(np.arange(N), np.arange(M)) / M)
    Vg = F * shift
    Vtg = _windowed_dft(x, k * theta, M) * shift
    Vd1 = _windowed_dft(x, d1, M) * shift
    Vd2 = _windowed_dft(x, d2, M) * shift
    Vtd1 = _windowed_dft(x, k * d1, M) * shift

    nu = np.arange(M)[None, :] / M
    with np.errstate(divide="ignore", invalid="ignore"):
        omega1 = nu - Vd1 / (2j * np.pi * Vg)
        denom = Vtg * Vd1 - Vtd1 * Vg
        q = (Vd2 * Vg - Vd1**2) / denom / (2j * np.pi)
        # group delay offset is Vtg / Vg
        omega2 = omega1 - q * Vtg / Vg
    ok = np.isfinite(omega2) & (np.abs(denom) > 1e-12 * np.abs(Vg) ** 2)
    omega = np.where(ok, omega2, omega1)
    omega = np.where(np.isfinite(omega), omega.real, nu)
    return F, omega


def _deposit(energy, positions, M, spread):
    """Accumulate each row's energies at fractional bin positions (mod M)."""
    N = energy.shape[0]
    out = np.zeros((N, M))
    rows = np.broadcast_to(np.arange(N)[:, None], energy.shape)
    if spread <= 0:
        cols = np.rint(positions).astype(int) % M
        np.add.at(out, (rows, cols), energy)
        return out
    reach = max(1, int(math.ceil(4 * spread)))
    base = np.floor(positions).astype(int)
    offsets = np.arange(-reach + 1, reach + 1)
    weights = np.exp(-((base[..., None] + offsets - positions[..., None]) ** 2) / (2 * spread**2))
    weights /= weights.sum(axis=-1, keepdims=True)
    cols = (base[..., None] + offsets) % M
    np.add.at(out, (np.broadcast_to(rows[..., None], cols.shape), cols), energy[..., None] * weights)
    return out


def vsst(
    signal,
    config: AnalysisConfig = AnalysisConfig(),
    spread: float = 0.5,
    threshold: float = 1e-8,
) -> SharpenedTfr:
    """Vertical second-order synchrosqueezed energy distribution.

    Spectrogram energy at ``(n, m)`` is moved along frequency to the
    second-order IF estimate of that bin. Each moved contribution is spread
    over neighbouring bins by a unit-sum Gaussian of ``spread`` bins
    (``spread=0`` snaps to the nearest bin), which keeps off-grid IFs
    resolvable. Bins below ``threshold * max`` energy stay in place.
    """
    x = _as_samples(signal)
    F, omega = _instantaneous_frequency_2nd_order(x, config)
    energy = np.abs(F) ** 2
    M = config.M
    positions = np.mod(omega * M, M)
    peak = energy.max() if energy.size else 0.0
    still = energy <= threshold * peak
    positions = np.where(still, np.arange(M)[None, :], positions)
    return SharpenedTfr(_deposit(energy, positions, M, spread), config)


# --- dumps ------------------------------------------------------------------


def write_tfr_csv(path, tfr) -> None:
    """One row per time frame, one column per frequency bin."""
    values = np.asarray(getattr(tfr, "values", tfr))
    if np.iscomplexobj(values):
        values = np.abs(values) ** 2
    np.savetxt(path, values, delimiter=",", fmt="%.10e")


def write_tfr_pgm(path, tfr, dynamic_range_db=60.0) -> None:
    """Plain-text PGM (P2) image: frequency on rows (low at bottom), time on columns."""
    values = np.asarray(getattr(tfr, "values", tfr))
    if np.iscomplexobj(values):
        values = np.abs(values) ** 2
    peak = values.max() if values.size else 0.0
    if peak <= 0:
        img = np.zeros(values.shape[::-1], dtype=int)
    else:
        db = 10 * np.log10(np.maximum(values / peak, 10 ** (-dynamic_range_db / 10)))
        img = np.rint(255 * (db + dynamic_range_db) / dynamic_range_db).astype(int).T[::-1]
    with open(path, "w") as fh:
        fh.write(f"P2\n{img.shape[1]} {img.shape[0]}\n255\n")
        for row in img:
            fh.write(" ".join(map(str, row)) + "\n")

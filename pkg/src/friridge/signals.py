"""Synthetic multi-component AM-FM signals with known instantaneous frequency.

Every generator returns a :class:`Component` sampled on ``n = 0 .. N-1``.
Phases are expressed in cycles, frequencies in cycles/sample.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._validation import check_frequency, check_positive_int, check_signal
from .exceptions import InvalidParameterError


@dataclass(frozen=True, eq=False)
class Component:
    """One AM-FM mode ``amplitude(n) * exp(2j*pi*phase(n))`` with its true IF."""

    amplitude: np.ndarray
    phase: np.ndarray
    inst_freq: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("amplitude", "phase", "inst_freq"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.amplitude.shape == self.phase.shape == self.inst_freq.shape):
            raise InvalidParameterError("amplitude, phase and inst_freq must share one length")
        if np.any(self.amplitude < 0):
            raise InvalidParameterError("amplitude must be nonnegative")

    @property
    def n_samples(self) -> int:
        return self.amplitude.shape[0]

    def amplitude_fn(self, n):
        return self.amplitude[n]

    def phase_fn(self, n):
        return self.phase[n]

    def if_fn(self, n):
        return self.inst_freq[n]

    def samples(self) -> np.ndarray:
        return self.amplitude * np.exp(2j * np.pi * self.phase)


@dataclass(frozen=True, eq=False)
class Signal:
    """A complex discrete-time signal, optionally carrying its ground-truth modes."""

    samples: np.ndarray
    ground_truth: Optional[tuple] = None

    def __post_init__(self):
        x = check_signal(self.samples).copy()
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        if self.ground_truth is not None:
            object.__setattr__(self, "ground_truth", tuple(self.ground_truth))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def n_components(self) -> int:
        return 0 if self.ground_truth is None else len(self.ground_truth)

    def truth_if(self) -> np.ndarray:
        """Ground-truth normalized IF, shape ``(K, N)``."""
        if self.ground_truth is None:
            raise InvalidParameterError("signal carries no ground truth")
        return np.array([c.inst_freq for c in self.ground_truth])

    def truth_amplitude(self) -> np.ndarray:
        if self.ground_truth is None:
            raise InvalidParameterError("signal carries no ground truth")
        return np.array([c.amplitude for c in self.ground_truth])

    def component_samples(self) -> np.ndarray:
        if self.ground_truth is None:
            raise InvalidParameterError("signal carries no ground truth")
        return np.array([c.samples() for c in self.ground_truth])


def _amplitude_array(amp, n_samples):
    amp = np.broadcast_to(np.asarray(amp, dtype=float), (n_samples,))
    if np.any(amp < 0):
        raise InvalidParameterError("amplitude must be nonnegative")
    return amp


def make_sinusoid(n_samples, f0, amp=1.0) -> Component:
    n_samples = check_positive_int(n_samples, "n_samples")
    f0 = check_frequency(f0, "f0")
    n = np.arange(n_samples)
    return Component(
        amplitude=_amplitude_array(amp, n_samples),
        phase=f0 * n,
        inst_freq=np.full(n_samples, f0),
        kind="sinusoid",
        params={"f0": f0, "amp": amp},
    )


def make_linear_chirp(n_samples, f_start, f_end, amp=1.0) -> Component:
    n_samples = check_positive_int(n_samples, "n_samples", minimum=2)
    f_start = check_frequency(f_start, "f_start")
    f_end = check_frequency(f_end, "f_end")
    n = np.arange(n_samples)
    rate = (f_end - f_start) / (n_samples - 1)
    return Component(
        amplitude=_amplitude_array(amp, n_samples),
        phase=f_start * n + 0.5 * rate * n**2,
        inst_freq=f_start + rate * n,
        kind="chirp",
        params={"f_start": f_start, "f_end": f_end, "amp": amp},
    )


def make_sin_fm(n_samples, f_center, f_dev, f_mod, amp=1.0) -> Component:
    """Sinusoidally frequency-modulated mode, IF ``f_center + f_dev*sin(2*pi*f_mod*n)``."""
    n_samples = check_positive_int(n_samples, "n_samples")
    if f_dev < 0 or f_mod <= 0:
        raise InvalidParameterError("f_dev must be >= 0 and f_mod > 0")
    check_frequency(f_center - f_dev, "f_center - f_dev")
    check_frequency(f_center + f_dev, "f_center + f_dev")
    n = np.arange(n_samples)
    w = 2 * np.pi * f_mod
    # phase(0) == 0
    phase = f_center * n + (f_dev / w) * (1.0 - np.cos(w * n))
    return Component(
        amplitude=_amplitude_array(amp, n_samples),
        phase=phase,
        inst_freq=f_center + f_dev * np.sin(w * n),
        kind="sin_fm",
        params={"f_center": f_center, "f_dev": f_dev, "f_mod": f_mod, "amp": amp},
    )


def synthesize(components: Sequence[Component], n_samples=None) -> Signal:
    """Sum the components sample-wise; an empty list yields a zero signal."""
    components = list(components)
    if not components:
        if n_samples is None:
            raise InvalidParameterError("n_samples is required for an empty component list")
        return Signal(np.zeros(check_positive_int(n_samples, "n_samples"), complex), ())
    lengths = {c.n_samples for c in components}
    if len(lengths) != 1 or (n_samples is not None and lengths != {n_samples}):
        raise InvalidParameterError(f"components have mismatched lengths {sorted(lengths)}")
    x = np.zeros(lengths.pop(), dtype=complex)
    for c in components:
        x += c.samples()
    return Signal(x, tuple(components))


def noise_variance(x, snr_db) -> float:
    """Per-sample complex noise variance giving ``snr_db`` on total energy."""
    return float(np.sum(np.abs(x) ** 2) / (x.shape[0] * 10.0 ** (snr_db / 10.0)))


def add_noise(signal: Signal, snr_db, seed=None) -> Signal:
    """Add circular complex white Gaussian noise; ``snr_db=inf`` returns the input."""
    x = signal.samples
    energy = float(np.sum(np.abs(x) ** 2))
    if energy == 0.0:
        raise InvalidParameterError("cannot set an SNR relative to a zero-energy signal")
    if np.isposinf(snr_db):
        return signal
    if np.isnan(snr_db):
        raise InvalidParameterError("snr_db is NaN")
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(noise_variance(x, snr_db) / 2.0)
    w = sigma * (rng.standard_normal(x.shape[0]) + 1j * rng.standard_normal(x.shape[0]))
    return Signal(x + w, signal.ground_truth)


def realized_snr(clean, noisy) -> float:
    clean = np.asarray(clean)
    noise = np.asarray(noisy) - clean
    return 10.0 * np.log10(np.sum(np.abs(clean) ** 2) / np.sum(np.abs(noise) ** 2))


def make_component(spec: dict, n_samples) -> Component:
    """Build a component from a config mapping such as ``{"kind": "chirp", ...}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    builders = {"sinusoid": make_sinusoid, "chirp": make_linear_chirp, "sin_fm": make_sin_fm}
    if kind not in builders:
        raise InvalidParameterError(f"unknown component kind {kind!r}")
    try:
        return builders[kind](n_samples, **spec)
    except TypeError as exc:
        raise InvalidParameterError(f"bad parameters for {kind}: {exc}") from None


# --- file formats -----------------------------------------------------------


def write_csv(path, samples) -> None:
    """Two-column ``real,imag`` CSV."""
    samples = check_signal(samples, allow_empty=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["real", "imag"])
        for v in samples:
            writer.writerow([repr(float(v.real)), repr(float(v.imag))])


def read_csv(path) -> Signal:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # empty file
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        raise InvalidParameterError(f"{path}: signal is empty")
    if data.shape[1] != 2:
        raise InvalidParameterError(f"{path}: expected two columns (real, imag)")
    return Signal(data[:, 0] + 1j * data[:, 1])


def write_truth_csv(path, signal: Signal) -> None:
    """Ground-truth sidecar: one row per (sample, component)."""
    freqs = signal.truth_if()
    amps = signal.truth_amplitude()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "component", "if_normalized", "amplitude"])
        for n in range(freqs.shape[1]):
            for k in range(freqs.shape[0]):
                writer.writerow([n, k, repr(float(freqs[k, n])), repr(float(amps[k, n]))])


def read_truth_csv(path) -> np.ndarray:
    """Return the truth sidecar as a ``(K, N)`` normalized-IF matrix."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = data[:, 0].astype(int)
    k = data[:, 1].astype(int)
    out = np.full((k.max() + 1, n.max() + 1), np.nan)
    out[k, n] = data[:, 2]
    return out


def write_wav(path, samples, rate=8000) -> None:
    """Mono WAV holding the real part, peak-normalized to float32."""
    from scipy.io import wavfile

    x = np.real(check_signal(samples, allow_empty=True))
    peak = np.max(np.abs(x)) if x.size else 0.0
    if peak > 0:
        x = x / peak
    wavfile.write(path, rate, x.astype(np.float32))


def read_wav(path) -> tuple[Signal, int]:
    """Load a mono WAV and extend it to its analytic signal."""
    from scipy.io import wavfile
    from scipy.signal import hilbert

    rate, data = wavfile.read(path)
    data = np.asarray(data)
    if data.ndim == 2:
        if data.shape[1] != 1:
            raise InvalidParameterError(f"{path}: expected a mono file, got {data.shape[1]} channels")
        data = data[:, 0]
    if np.issubdtype(data.dtype, np.integer):
        data = data.astype(float) / np.iinfo(data.dtype).max
    data = data.astype(float)
    if data.size == 0:
        raise InvalidParameterError(f"{path}: empty audio file")
    return Signal(hilbert(data)), int(rate)


def load_signal(path) -> Signal:
    suffix = Path(path).suffix.lower()
    if suffix == ".wav":
        return read_wav(path)[0]
    return read_csv(path)

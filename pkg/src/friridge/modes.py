"""Mode reconstruction by binary masking of the STFT around estimated ridges."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._validation import check_signal
from .exceptions import InvalidParameterError
from .signals import Signal
from .tfr import StftMatrix, inverse_stft


@dataclass(frozen=True, eq=False)
class BinaryMask:
    support: np.ndarray  # (N, M) bool
    halfwidth: int


def build_mask(traj, halfwidth=10, M=None) -> list:
    """One mask per component: ``|m - round(ridge[n])| <= halfwidth``, no wrap."""
    ridges = np.asarray(getattr(traj, "if_estimates", traj), dtype=float)
    if ridges.ndim == 1:
        ridges = ridges[None, :]
    M = M if M is not None else getattr(traj, "M", None)
    if M is None:
        raise InvalidParameterError("M is required for a bare ridge array")
    if halfwidth < 0:
        raise InvalidParameterError(f"halfwidth must be >= 0, got {halfwidth}")
    m = np.arange(M)[None, :]
    masks = []
    for ridge in ridges:
        centre = np.rint(ridge)[:, None]
        masks.append(BinaryMask(np.abs(m - centre) <= halfwidth, int(halfwidth)))
    return masks


def extract_mode(F: StftMatrix, mask) -> Signal:
    support = np.asarray(getattr(mask, "support", mask), dtype=bool)
    if support.shape != F.values.shape:
        raise InvalidParameterError(f"mask shape {support.shape} differs from STFT {F.values.shape}")
    return inverse_stft(StftMatrix(np.where(support, F.values, 0), F.config))


def rqf(reference, estimate) -> float:
    """``10 log10(|x|^2 / |x - x_hat|^2)`` in dB; ``inf`` for an exact match."""
    x = check_signal(getattr(reference, "samples", reference))
    y = check_signal(getattr(estimate, "samples", estimate))
    if x.shape != y.shape:
        raise InvalidParameterError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    ref = np.sum(np.abs(x) ** 2)
    if ref == 0:
        raise InvalidParameterError("reference signal has zero energy")
    err = np.sum(np.abs(x - y) ** 2)
    if err == 0:
        return float("inf")
    return float(10 * np.log10(ref / err))


def match_modes(references, estimates):
    """Per-reference RQF under the label permutation with the best mean RQF."""
    refs = [getattr(r, "samples", r) for r in references]
    ests = [getattr(e, "samples", e) for e in estimates]
    table = np.array([[rqf(r, e) for e in ests] for r in refs])
    K = len(refs)
    if len(ests) < K:
        raise InvalidParameterError(f"{len(ests)} estimates for {K} references")
    perms = itertools.permutations(range(len(ests)), K)
    best = max(perms, key=lambda p: np.mean(np.minimum(table[range(K), p], 1e6)))
    return table[range(K), best], list(best)

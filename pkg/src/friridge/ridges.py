"""Ridge trajectories from per-frame pulse recovery, and IF error metrics."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import InvalidParameterError, PipelineFailureError
from .fri import BatchResult, DiracStream, FilterKernel, recover_frames


@dataclass(frozen=True, eq=False)
class RidgeTrajectories:
    """K tracks over N frames; IFs are in bins on ``[0, M)``."""

    if_estimates: np.ndarray  # (K, N)
    amp_estimates: np.ndarray  # (K, N)
    per_frame_flags: np.ndarray  # (N,)
    M: int
    diagnostics: Optional[BatchResult] = field(default=None, repr=False)

    @property
    def n_components(self) -> int:
        return self.if_estimates.shape[0]

    @property
    def n_frames(self) -> int:
        return self.if_estimates.shape[1]

    @property
    def if_normalized(self) -> np.ndarray:
        return self.if_estimates / self.M


@dataclass(frozen=True)
class MetricsReport:
    rmse: float
    rmae: float
    per_component_breakdown: tuple  # ((rmse_k, rmae_k), ...)
    excluded_boundary_frames: int


def _circular_gap(a, b, M):
    d = np.mod(a - b, M)
    return np.minimum(d, M - d)


def _associate_arrays(positions, weights, status, M, K):
    N = positions.shape[0]
    flags = np.asarray(status, dtype=object).copy()
    ok = flags != "degenerate"
    if not np.any(ok):
        raise PipelineFailureError("every frame is degenerate")
    tracks = np.empty((K, N))
    amps = np.empty((K, N))
    first = int(np.flatnonzero(ok)[0])
    order = np.argsort(positions[first])
    prev_pos, prev_amp = positions[first, order], weights[first, order]
    # frames before the first usable one inherit its values
    tracks[:, : first + 1] = prev_pos[:, None]
    amps[:, : first + 1] = prev_amp[:, None]
    for n in range(first + 1, N):
        if not ok[n]:
            tracks[:, n], amps[:, n] = prev_pos, prev_amp
            continue
        cost = _circular_gap(prev_pos[:, None], positions[n][None, :], M)
        _, cols = linear_sum_assignment(cost)
        prev_pos, prev_amp = positions[n, cols], weights[n, cols]
        tracks[:, n], amps[:, n] = prev_pos, prev_amp
    return RidgeTrajectories(tracks, amps, flags.astype(str), M)


def associate(per_frame: Sequence[Optional[DiracStream]], K, M) -> RidgeTrajectories:
    """Link per-frame pulses into K tracks by minimal total displacement.

    ``None`` (or a stream with NaN positions) marks a degenerate frame; it
    holds the previous frame's values.
    """
    N = len(per_frame)
    positions = np.full((N, K), np.nan)
    weights = np.full((N, K), np.nan)
    status = []
    for n, stream in enumerate(per_frame):
        if stream is None or np.any(np.isnan(stream.positions)):
            status.append("degenerate")
            continue
        if len(stream.positions) != K:
            raise InvalidParameterError(f"frame {n} has {len(stream.positions)} pulses, expected {K}")
        positions[n], weights[n] = stream.positions, stream.weights
        status.append("warned" if stream.warned else "ok")
    return _associate_arrays(positions, weights, status, M, K)


def estimate_ridges(
    tfr, K, method="tls", kernel: Optional[FilterKernel] = None, keep_diagnostics=False
) -> RidgeTrajectories:
    """Recover pulses in every column of ``tfr`` and associate them into tracks."""
    from .fri import build_kernel

    values = np.asarray(getattr(tfr, "values", tfr))
    config = getattr(tfr, "config", None)
    if kernel is None:
        if config is None:
            raise InvalidParameterError("a kernel is required for a bare matrix")
        kernel = build_kernel(config)
    if config is not None and config.M != kernel.M:
        raise InvalidParameterError(f"kernel built for M={kernel.M}, TFR has M={config.M}")
    batch = recover_frames(values, kernel, K, method, keep_diagnostics=keep_diagnostics)
    traj = _associate_arrays(batch.positions, batch.weights, batch.status, kernel.M, K)
    if keep_diagnostics:
        traj = RidgeTrajectories(
            traj.if_estimates, traj.amp_estimates, traj.per_frame_flags, traj.M, batch
        )
    return traj


# --- metrics ----------------------------------------------------------------


def _as_estimates(est):
    return np.asarray(getattr(est, "if_estimates", est), dtype=float)


def _evaluated(est, truth, boundary):
    est = _as_estimates(est)
    truth = np.asarray(truth, dtype=float)
    if est.ndim == 1:
        est = est[None, :]
    if truth.ndim == 1:
        truth = truth[None, :]
    if est.shape != truth.shape:
        raise InvalidParameterError(f"estimate shape {est.shape} differs from truth {truth.shape}")
    N = est.shape[1]
    if boundary < 0 or 2 * boundary >= N:
        raise InvalidParameterError(f"cannot exclude {boundary} frames at each end of {N}")
    sl = slice(boundary, N - boundary)
    return est[:, sl], truth[:, sl]


def match_components(est, truth, M, matching="global", power=2):
    """Reorder estimates to the labels of ``truth`` (both ``(K, N)``, bins).

    ``matching="global"`` picks one permutation for the whole record by
    exhaustive search (K <= 4) or linear assignment; ``"frame"`` re-matches
    every frame independently.
    """
    K = est.shape[0]
    if matching == "frame":
        if K <= 4:
            perms = np.array(list(itertools.permutations(range(K))))
            costs = np.abs(est[perms] - truth[None]) ** power  # (P, K, N)
            best = np.argmin(costs.sum(axis=1), axis=0)
            return np.take_along_axis(est, perms[best].T, axis=0)
        out = np.empty_like(est)
        for n in range(est.shape[1]):
            cost = np.abs(est[:, n][None, :] - truth[:, n][:, None]) ** power
            _, cols = linear_sum_assignment(cost)
            out[:, n] = est[cols, n]
        return out
    if matching != "global":
        raise InvalidParameterError(f"matching must be 'global' or 'frame', got {matching!r}")
    cost = (np.abs(est[None, :, :] - truth[:, None, :]) ** power).sum(axis=2)  # (truth, est)
    if K <= 4:
        perm = min(itertools.permutations(range(K)), key=lambda p: cost[range(K), p].sum())
        return est[list(perm)]
    _, cols = linear_sum_assignment(cost)
    return est[cols]


def rmse(est, truth, M, boundary=0, matching="global") -> float:
    """``sum_k sum_n (truth - est)^2 / M^2`` over evaluated frames."""
    e, t = _evaluated(est, truth, boundary)
    e = match_components(e, t, M, matching, power=2)
    return float(np.sum((t - e) ** 2) / M**2)


def rmae(est, truth, M, boundary=0, matching="global") -> float:
    """``sum_k sum_n |truth - est| / M`` over evaluated frames."""
    e, t = _evaluated(est, truth, boundary)
    e = match_components(e, t, M, matching, power=1)
    return float(np.sum(np.abs(t - e)) / M)


def evaluate(est, truth, M, boundary=0, matching="global") -> MetricsReport:
    e, t = _evaluated(est, truth, boundary)
    e = match_components(e, t, M, matching, power=2)
    per = tuple(
        (float(np.sum((t[k] - e[k]) ** 2) / M**2), float(np.sum(np.abs(t[k] - e[k])) / M))
        for k in range(t.shape[0])
    )
    return MetricsReport(
        rmse=float(sum(p[0] for p in per)),
        rmae=rmae(est, truth, M, boundary, matching),
        per_component_breakdown=per,
        excluded_boundary_frames=2 * boundary,
    )


def default_boundary(L) -> int:
    return int(math.ceil(2 * L))


# --- export -----------------------------------------------------------------


def write_trajectories_csv(path, traj: RidgeTrajectories) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "component", "if_bins", "if_normalized", "amplitude", "flag"])
        for n in range(traj.n_frames):
            for k in range(traj.n_components):
                b = traj.if_estimates[k, n]
                writer.writerow(
                    [n, k, repr(float(b)), repr(float(b / traj.M)),
                     repr(float(traj.amp_estimates[k, n])), traj.per_frame_flags[n]]
                )


def read_trajectories_csv(path, M) -> RidgeTrajectories:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    N = max(int(r["frame"]) for r in rows) + 1
    K = max(int(r["component"]) for r in rows) + 1
    ifs, amps = np.empty((K, N)), np.empty((K, N))
    flags = np.empty(N, dtype=object)
    for r in rows:
        n, k = int(r["frame"]), int(r["component"])
        ifs[k, n], amps[k, n] = float(r["if_bins"]), float(r["amplitude"])
        flags[n] = r["flag"]
    return RidgeTrajectories(ifs, amps, flags.astype(str), M)


def write_diagnostics_csv(path, batch: BatchResult) -> None:
    """Long-format dump of per-frame coefficients, filter taps and roots."""
    if batch.coefficients is None:
        raise InvalidParameterError("batch was computed without diagnostics")
    M0 = (batch.coefficients.shape[1] - 1) // 2
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "kind", "index", "real", "imag"])
        for n in range(batch.coefficients.shape[0]):
            for kind, arr, offset in (
                ("f_hat", batch.coefficients[n], -M0),
                ("h", batch.filters[n], 0),
                ("root", batch.roots[n], 0),
            ):
                for i, v in enumerate(arr):
                    writer.writerow([n, kind, i + offset, repr(float(v.real)), repr(float(v.imag))])

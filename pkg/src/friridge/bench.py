"""Experiment configuration and the Monte-Carlo SNR sweep."""

from __future__ import annotations

import copy
import csv
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from typing import Optional

import numpy as np
import yaml

from .estimators import METHODS, analyze
from .exceptions import InvalidParameterError
from .modes import build_mask, extract_mode, match_modes
from .ridges import default_boundary, rmae, rmse
from .signals import Signal, add_noise, load_signal, make_component, synthesize
from .tfr import AnalysisConfig


@dataclass
class SignalSpec:
    n_samples: int = 500
    components: list = field(default_factory=list)
    input: Optional[str] = None


@dataclass
class AnalysisSpec:
    L: float = 20.0
    M: int = 500
    M0: Optional[int] = None
    window_halfwidth: Optional[int] = None
    boundary: Optional[int] = None

    def config(self) -> AnalysisConfig:
        return AnalysisConfig(L=self.L, M=self.M, window_halfwidth=self.window_halfwidth, M0=self.M0)

    def boundary_frames(self) -> int:
        return default_boundary(self.L) if self.boundary is None else int(self.boundary)


@dataclass
class EstimatorSpec:
    method: str = "fri-tls"
    K: int = 3
    sst_std: float = 0.5
    sst_spread: float = 0.5
    mask_halfwidth: int = 10


@dataclass
class SweepSpec:
    methods: list = field(default_factory=lambda: list(METHODS))
    snr_db: list = field(default_factory=lambda: [-5.0, 0.0, 5.0, 10.0])
    n_realizations: int = 100
    base_seed: int = 0


@dataclass
class OutputSpec:
    dir: str = "results"


@dataclass
class ExperimentConfig:
    signal: SignalSpec = field(default_factory=SignalSpec)
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)
    estimator: EstimatorSpec = field(default_factory=EstimatorSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.estimator.method not in METHODS:
            raise InvalidParameterError(f"unknown method {self.estimator.method!r}")
        bad = [m for m in self.sweep.methods if m not in METHODS]
        if bad or not self.sweep.methods:
            raise InvalidParameterError(f"sweep methods must be a non-empty subset of {list(METHODS)}")
        if not self.sweep.snr_db:
            raise InvalidParameterError("snr list is empty")
        if int(self.sweep.n_realizations) < 1:
            raise InvalidParameterError("n_realizations must be >= 1")
        if int(self.estimator.K) < 1:
            raise InvalidParameterError("K must be >= 1")
        self.sweep.snr_db = [parse_snr(s) for s in self.sweep.snr_db]
        self.analysis.config()

    @classmethod
    def from_dict(cls, data) -> "ExperimentConfig":
        data = data or {}
        sections = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(sections)
        if unknown:
            raise InvalidParameterError(f"unknown config sections: {sorted(unknown)}")
        kwargs = {}
        for name, spec_cls in (
            ("signal", SignalSpec),
            ("analysis", AnalysisSpec),
            ("estimator", EstimatorSpec),
            ("sweep", SweepSpec),
            ("outputs", OutputSpec),
        ):
            section = data.get(name) or {}
            allowed = {f.name for f in fields(spec_cls)}
            extra = set(section) - allowed
            if extra:
                raise InvalidParameterError(f"unknown keys in [{name}]: {sorted(extra)}")
            kwargs[name] = spec_cls(**section)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **overrides) -> "ExperimentConfig":
        """Copy with dotted-path overrides, e.g. ``{"sweep.n_realizations": 5}``."""
        new = copy.deepcopy(self)
        for path, value in overrides.items():
            section, key = path.split(".")
            setattr(getattr(new, section), key, value)
        new.validate()
        return new


def parse_snr(value) -> float:
    if isinstance(value, str):
        value = value.strip().lower()
        if value in ("inf", "+inf", "none", "clean"):
            return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"bad SNR value {value!r}") from None


def default_config() -> ExperimentConfig:
    text = resources.files("friridge").joinpath("data/default.yaml").read_text()
    return ExperimentConfig.from_dict(yaml.safe_load(text))


def load_config(path) -> ExperimentConfig:
    """Read a YAML config; missing sections fall back to the shipped defaults."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    base = default_config().to_dict()
    for section, values in data.items():
        if section in base and isinstance(values, dict):
            base[section].update(values)
        else:
            base[section] = values
    return ExperimentConfig.from_dict(base)


def build_signal(config: ExperimentConfig) -> Signal:
    spec = config.signal
    if spec.input:
        return load_signal(spec.input)
    comps = [make_component(c, spec.n_samples) for c in spec.components]
    return synthesize(comps, spec.n_samples)


# --- sweep ------------------------------------------------------------------


@dataclass(frozen=True)
class RealizationResult:
    method: str
    snr_db: float
    seed: int
    rmse: float
    rmae: float
    rqf: tuple
    degenerate_frames: int


def run_realization(clean: Signal, method, snr_db, seed, config: ExperimentConfig) -> RealizationResult:
    if clean.ground_truth is None:
        raise InvalidParameterError("benchmarking needs a signal with ground truth")
    noisy = add_noise(clean, snr_db, seed)
    cfg = config.analysis.config()
    est = config.estimator
    result = analyze(noisy, est.K, method, cfg, est.sst_std, est.sst_spread)
    truth = clean.truth_if() * cfg.M
    boundary = config.analysis.boundary_frames()
    ridges = result.ridges
    if ridges.n_components == truth.shape[0]:
        e_rmse = rmse(ridges, truth, cfg.M, boundary)
        e_rmae = rmae(ridges, truth, cfg.M, boundary)
        masks = build_mask(ridges, est.mask_halfwidth)
        modes = [extract_mode(result.stft, m) for m in masks]
        q, _ = match_modes(clean.component_samples(), modes)
        q = tuple(float(v) for v in q)
    else:
        e_rmse = e_rmae = math.nan
        q = ()
    return RealizationResult(
        method, float(snr_db), int(seed), e_rmse, e_rmae, q,
        int(np.sum(ridges.per_frame_flags == "degenerate")),
    )


@dataclass(frozen=True)
class BenchRow:
    method: str
    snr_db: float
    n_realizations: int
    rmse_mean: float
    rmse_std: float
    rmae_mean: float
    rmae_std: float
    rqf_mean: tuple
    rqf_std: tuple
    rqf_avg_mean: float
    rqf_avg_std: float
    degenerate_frames_mean: float


def _aggregate(results) -> BenchRow:
    r0 = results[0]
    e = np.array([r.rmse for r in results])
    a = np.array([r.rmae for r in results])
    q = np.array([r.rqf for r in results], dtype=float)
    if q.size:
        avg = q.mean(axis=1)
        q_mean, q_std = tuple(q.mean(axis=0)), tuple(q.std(axis=0))
        avg_mean, avg_std = float(avg.mean()), float(avg.std())
    else:
        q_mean = q_std = ()
        avg_mean = avg_std = math.nan
    return BenchRow(
        r0.method, r0.snr_db, len(results),
        float(e.mean()), float(e.std()), float(a.mean()), float(a.std()),
        tuple(float(v) for v in q_mean), tuple(float(v) for v in q_std), avg_mean, avg_std,
        float(np.mean([r.degenerate_frames for r in results])),
    )


def run_bench(config: ExperimentConfig, progress=None) -> list:
    """One row per (method, SNR); realization ``r`` always uses seed ``base_seed + r``."""
    clean = build_signal(config)
    sweep = config.sweep
    rows = []
    for method in sweep.methods:
        for snr in sweep.snr_db:
            results = []
            for r in range(int(sweep.n_realizations)):
                results.append(run_realization(clean, method, snr, sweep.base_seed + r, config))
                if progress is not None:
                    progress(method, snr, r)
            rows.append(_aggregate(results))
    return rows


# --- outputs ----------------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v))


def write_metrics_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "snr_db", "n_realizations", "rmse_mean", "rmse_std", "rmae_mean",
             "rmae_std", "degenerate_frames_mean"]
        )
        for r in rows:
            writer.writerow(
                [r.method, _fmt(r.snr_db), r.n_realizations, _fmt(r.rmse_mean), _fmt(r.rmse_std),
                 _fmt(r.rmae_mean), _fmt(r.rmae_std), _fmt(r.degenerate_frames_mean)]
            )


def write_rqf_csv(path, rows) -> None:
    """Per-component RQF table: mean and std over realizations, plus their average."""
    K = max((len(r.rqf_mean) for r in rows), default=0)
    header = ["method", "snr_db"]
    for k in range(K):
        header += [f"c{k + 1}_mean", f"c{k + 1}_std"]
    header += ["average_mean", "average_std"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in rows:
            line = [r.method, _fmt(r.snr_db)]
            for m, s in zip(r.rqf_mean, r.rqf_std):
                line += [_fmt(m), _fmt(s)]
            line += [_fmt(r.rqf_avg_mean), _fmt(r.rqf_avg_std)]
            writer.writerow(line)


def write_plot_csv(path, rows, metric="rmse_mean") -> None:
    """SNR on rows, methods on columns."""
    methods = list(dict.fromkeys(r.method for r in rows))
    snrs = sorted({r.snr_db for r in rows})
    table = {(r.method, r.snr_db): getattr(r, metric) for r in rows}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr_db"] + methods)
        for s in snrs:
            writer.writerow([_fmt(s)] + [_fmt(table.get((m, s), math.nan)) for m in methods])

"""Command-line entry point: ``friridge {generate,estimate,bench,extract}``."""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np
import yaml

from . import bench
from .exceptions import InvalidParameterError
from .modes import build_mask, extract_mode, match_modes, rqf
from .ridges import evaluate, write_diagnostics_csv, write_trajectories_csv
from .signals import (
    add_noise,
    load_signal,
    read_truth_csv,
    write_csv,
    write_truth_csv,
    write_wav,
)


def _truth_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".truth.csv")


def _config(args) -> bench.ExperimentConfig:
    cfg = bench.load_config(args.config) if args.config else bench.default_config()
    overrides = {}
    if getattr(args, "K", None) is not None:
        overrides["estimator.K"] = args.K
    if getattr(args, "L", None) is not None:
        overrides["analysis.L"] = args.L
    if getattr(args, "M", None) is not None:
        overrides["analysis.M"] = args.M
    if getattr(args, "realizations", None) is not None:
        overrides["sweep.n_realizations"] = args.realizations
    if getattr(args, "seed", None) is not None:
        overrides["sweep.base_seed"] = args.seed
    if args.command == "bench":
        if args.method:
            overrides["sweep.methods"] = [m for arg in args.method for m in arg.split(",")]
        if args.snr:
            overrides["sweep.snr_db"] = [s for arg in args.snr for s in arg.split(",")]
    elif getattr(args, "method", None):
        overrides["estimator.method"] = args.method[-1]
    return cfg.replace(**overrides) if overrides else cfg


def _single_snr(args):
    if not args.snr:
        return math.inf
    return bench.parse_snr(args.snr[-1])


def _load_input(args, cfg):
    """Signal to analyse plus the clean reference and truth IF when known."""
    if getattr(args, "input", None):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            signal = load_signal(args.input)
        truth_file = Path(args.truth) if args.truth else _truth_path(args.input)
        truth = read_truth_csv(truth_file) if truth_file.exists() else None
        return signal, None, truth
    clean = bench.build_signal(cfg)
    noisy = add_noise(clean, _single_snr(args), cfg.sweep.base_seed)
    truth = clean.truth_if() if clean.ground_truth else None
    return noisy, clean, truth


def cmd_generate(args) -> int:
    cfg = _config(args)
    clean = bench.build_signal(cfg)
    signal = add_noise(clean, _single_snr(args), cfg.sweep.base_seed)
    out = Path(args.out or "signal.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() == ".wav":
        write_wav(out, signal.samples)
    else:
        write_csv(out, signal.samples)
    if clean.ground_truth:
        write_truth_csv(_truth_path(out), clean)
    print(f"wrote {out} ({len(signal)} samples, {clean.n_components} components)")
    return 0


def cmd_estimate(args) -> int:
    cfg = _config(args)
    signal, _, truth = _load_input(args, cfg)
    acfg = cfg.analysis.config()
    est = cfg.estimator
    result = bench.analyze(signal, est.K, est.method, acfg, est.sst_std, est.sst_spread,
                           keep_diagnostics=args.debug)
    out = Path(args.out or "trajectories.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trajectories_csv(out, result.ridges)
    if args.debug:
        write_diagnostics_csv(out.with_name(out.stem + ".diagnostics.csv"), result.ridges.diagnostics)
    msg = f"wrote {out} ({est.method}, K={est.K})"
    if truth is not None and truth.shape[0] == est.K and truth.shape[1] == len(signal):
        rep = evaluate(result.ridges, truth * acfg.M, acfg.M, cfg.analysis.boundary_frames())
        msg += f" rmse={rep.rmse:.6g} rmae={rep.rmae:.6g}"
    print(msg)
    return 0


def cmd_bench(args) -> int:
    cfg = _config(args)
    out = Path(args.out or cfg.outputs.dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = bench.run_bench(cfg)
    bench.write_metrics_csv(out / "metrics.csv", rows)
    bench.write_rqf_csv(out / "rqf.csv", rows)
    bench.write_plot_csv(out / "rmse_vs_snr.csv", rows, "rmse_mean")
    bench.write_plot_csv(out / "rmae_vs_snr.csv", rows, "rmae_mean")
    with open(out / "config.yaml", "w") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=False)
    for r in rows:
        print(f"{r.method:8s} snr={r.snr_db:6.1f} rmse={r.rmse_mean:.4g}±{r.rmse_std:.2g} "
              f"rmae={r.rmae_mean:.4g}±{r.rmae_std:.2g} rqf_avg={r.rqf_avg_mean:.2f}±{r.rqf_avg_std:.2f}")
    return 0


def cmd_extract(args) -> int:
    cfg = _config(args)
    signal, clean, _ = _load_input(args, cfg)
    acfg = cfg.analysis.config()
    est = cfg.estimator
    result = bench.analyze(signal, est.K, est.method, acfg, est.sst_std, est.sst_spread)
    out = Path(args.out or "modes")
    out.mkdir(parents=True, exist_ok=True)
    if args.all_pass:
        masks = [np.ones(result.stft.values.shape, bool)]
    else:
        masks = build_mask(result.ridges, est.mask_halfwidth)
    modes = [extract_mode(result.stft, m) for m in masks]
    for k, mode in enumerate(modes):
        write_csv(out / f"mode_{k}.csv", mode.samples)
        if args.wav:
            write_wav(out / f"mode_{k}.wav", mode.samples)
    report = []
    if args.all_pass:
        report = [("all", 0, rqf(signal, modes[0]))]
    elif clean is not None and clean.ground_truth and len(clean.ground_truth) <= len(modes):
        values, perm = match_modes(clean.component_samples(), modes)
        report = [(f"c{k + 1}", perm[k], v) for k, v in enumerate(values)]
    if report:
        with open(out / "rqf.csv", "w") as fh:
            fh.write("reference,mode,rqf_db\n")
            for ref, mode, value in report:
                fh.write(f"{ref},{mode},{float(value)!r}\n")
        print(" ".join(f"{ref}={value:.2f}dB" for ref, _, value in report))
    print(f"wrote {len(modes)} modes to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="friridge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, multi=False):
        p.add_argument("--config", help="YAML experiment config (defaults shipped with the package)")
        p.add_argument("--method", action="append", help="fri | fri-tls | fri-sst" + (" (repeatable)" if multi else ""))
        p.add_argument("--snr", action="append", help="SNR in dB, 'inf' for no noise" + (" (comma list)" if multi else ""))
        p.add_argument("--seed", type=int, help="noise seed (base seed for sweeps)")
        p.add_argument("--out", help="output path")
        p.add_argument("--K", type=int, help="number of components")
        p.add_argument("--L", type=float, help="window time spread in samples")
        p.add_argument("--M", type=int, help="number of frequency bins")

    p = sub.add_parser("generate", help="write a synthetic signal and its ground truth")
    common(p)
    p.set_defaults(func=cmd_generate)

    for name, func, helptext in (
        ("estimate", cmd_estimate, "estimate ridge trajectories for one signal"),
        ("extract", cmd_extract, "reconstruct modes by masking the STFT around each ridge"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--input", help="signal file (.csv real,imag or mono .wav)")
        p.add_argument("--truth", help="ground-truth sidecar CSV")
        if name == "estimate":
            p.add_argument("--debug", action="store_true", help="also dump per-frame diagnostics")
        else:
            p.add_argument("--all-pass", action="store_true", help="keep the whole STFT (round-trip check)")
            p.add_argument("--wav", action="store_true", help="also write WAV files")
        p.set_defaults(func=func)

    p = sub.add_parser("bench", help="Monte-Carlo sweep over SNR and methods")
    common(p, multi=True)
    p.add_argument("--realizations", type=int, help="noise realizations per (method, SNR)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidParameterError, ValueError, OSError, RuntimeError) as exc:
        print(f"friridge {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

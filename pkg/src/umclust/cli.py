"""Command-line interface.

Subcommands:
    synth       write a synthetic multimodal dataset (containers + manifest)
    run         full pipeline over a seed list, with metric report
    sweep       Cartesian hyperparameter grid of runs, with summary CSV
    eval        score an assignments file against a labels file
    grad-check  run the finite-difference gradient check suite

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
The env var UMC_THREADS caps worker threads.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from . import checks, data, metrics
from .config import RunConfig, load_config, parse_entries
from .errors import BadGrid, UmclustError
from .trainer import config_hash, run_pipeline, save_checkpoint


def _apply_thread_cap() -> None:
    threads = os.environ.get("UMC_THREADS")
    if threads:
        torch.set_num_threads(int(threads))


def _parse_overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise UmclustError(f"--set expects key=value, got {pair!r}")
        out[key.strip()] = value.strip()
    return out


# --- synth -------------------------------------------------------------------

def cmd_synth(args) -> int:
    pairs = []
    if args.ambiguous:
        for chunk in args.ambiguous.split(","):
            a, _, b = chunk.partition(":")
            pairs.append((int(a), int(b)))
    spec = data.SynthSpec(
        num_classes=args.classes, samples_per_class=args.per_class,
        text_dim=args.text_dim, video_dim=args.video_dim, audio_dim=args.audio_dim,
        video_len=args.video_len, audio_len=args.audio_len,
        separation=args.separation, noise_scale=args.noise,
        text_ambiguity_pairs=pairs, seed=args.seed)
    manifest = data.write_dataset(args.out, data.generate_synthetic(spec))
    print(f"wrote {manifest}")
    return 0


# --- run ---------------------------------------------------------------------

def run_once(dataset: data.Dataset, cfg: RunConfig, seed: int,
             out_dir: Path) -> dict:
    rec = dataset.records[0]
    enc_cfg = cfg.encoder_cfg(text_dim=rec.text.shape[0],
                              video_dim=rec.video.shape[1],
                              audio_dim=rec.audio.shape[1])
    train_cfg = cfg.train_cfg(seed)
    start = time.time()
    artifacts, assignments = run_pipeline(dataset, enc_cfg, train_cfg,
                                          cfg.select_cfg())
    elapsed = time.time() - start

    np.savetxt(out_dir / f"assignments_seed{seed}.txt", assignments, fmt="%d")
    data.write_container(out_dir / f"embeddings_seed{seed}.umcf", "fused",
                         artifacts.embeddings.astype(np.float32))
    save_checkpoint(out_dir / f"checkpoint_seed{seed}.pt", artifacts.model,
                    enc_cfg, train_cfg)

    row = {"seed": seed, "elapsed_s": round(elapsed, 2),
           "rounds": [
               {"round": r.round, "t": r.t, "inertia": r.inertia,
                "n_high": r.n_high, "mscl": r.mscl, "ucl": r.ucl, "mse": r.mse}
               for r in artifacts.rounds],
           "pretrain_losses": artifacts.pretrain_losses}
    if dataset.labels is not None:
        report = metrics.evaluate(dataset.labels, assignments,
                                  k=max(dataset.num_classes,
                                        int(assignments.max()) + 1))
        row["metrics"] = report.as_dict()
    return row


def _aggregate(rows: list[dict]) -> dict:
    keys = ("nmi", "ari", "acc", "fmi", "avg")
    scored = [r["metrics"] for r in rows if "metrics" in r]
    if not scored:
        return {}
    return {
        "mean": {k: float(np.mean([m[k] for m in scored])) for k in keys},
        "std": {k: float(np.std([m[k] for m in scored])) for k in keys},
    }


def cmd_run(args) -> int:
    _apply_thread_cap()
    cfg = load_config(args.config, _parse_overrides(args.set or []))
    if args.seeds:
        cfg.seeds = [int(s) for s in args.seeds.split(",")]
    dataset = data.load_dataset(cfg.manifest)
    if dataset.labels is None:
        print("warning: no labels in manifest; metrics will be skipped",
              file=sys.stderr)

    out_dir = Path(args.out or cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [run_once(dataset, cfg, seed, out_dir) for seed in cfg.seeds]

    report = {
        "config": cfg.as_flat_dict(),
        "config_hash": config_hash(cfg.train_cfg(0), cfg.select_cfg()),
        "per_seed": rows,
        "aggregate": _aggregate(rows),
    }
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report, indent=2))
    _write_summary_csv(out_dir / "summary.csv", rows, report["aggregate"])
    print(f"wrote {report_path}")
    if report["aggregate"]:
        mean = report["aggregate"]["mean"]
        print("mean  " + "  ".join(f"{k}={100 * mean[k]:.2f}"
                                   for k in ("nmi", "ari", "acc", "fmi", "avg")))
    return 0


def _write_summary_csv(path: Path, rows: list[dict], aggregate: dict) -> None:
    keys = ("nmi", "ari", "acc", "fmi", "avg")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["seed", *keys])
        for row in rows:
            if "metrics" in row:
                writer.writerow([row["seed"]] +
                                [f"{100 * row['metrics'][k]:.2f}" for k in keys])
        if aggregate:
            writer.writerow(["mean"] +
                            [f"{100 * aggregate['mean'][k]:.2f}" for k in keys])
            writer.writerow(["std"] +
                            [f"{100 * aggregate['std'][k]:.2f}" for k in keys])


# --- sweep -------------------------------------------------------------------

def cmd_sweep(args) -> int:
    _apply_thread_cap()
    base_overrides = _parse_overrides(args.set or [])
    grids: dict[str, list[str]] = {}
    for spec in args.grid or []:
        key, sep, values = spec.partition("=")
        if not sep or not values:
            raise BadGrid(f"--grid expects key=v1,v2,..., got {spec!r}")
        grids[key.strip()] = [v.strip() for v in values.split(",") if v.strip()]
    if not grids:
        raise BadGrid("sweep needs at least one non-empty --grid")

    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    keys = sorted(grids)
    summary_rows = []
    for combo in itertools.product(*(grids[k] for k in keys)):
        point = dict(zip(keys, combo))
        cfg = load_config(args.config, {**base_overrides, **point})
        if args.seeds:
            cfg.seeds = [int(s) for s in args.seeds.split(",")]
        dataset = data.load_dataset(cfg.manifest)
        tag = "_".join(f"{k.split('.')[-1]}{v}" for k, v in point.items())
        point_dir = out_root / tag
        point_dir.mkdir(parents=True, exist_ok=True)
        rows = [run_once(dataset, cfg, seed, point_dir) for seed in cfg.seeds]
        agg = _aggregate(rows)
        (point_dir / "report.json").write_text(json.dumps(
            {"config": cfg.as_flat_dict(), "per_seed": rows, "aggregate": agg},
            indent=2))
        summary_rows.append((point, agg))
        print(f"{tag}: " + (", ".join(
            f"{k}={100 * agg['mean'][k]:.2f}" for k in ("nmi", "ari", "acc", "fmi"))
            if agg else "no labels"))

    with open(out_root / "sweep_summary.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(keys + ["nmi", "ari", "acc", "fmi", "avg"])
        for point, agg in summary_rows:
            mean = agg.get("mean", {})
            writer.writerow([point[k] for k in keys] +
                            [f"{100 * mean.get(k, float('nan')):.2f}"
                             for k in ("nmi", "ari", "acc", "fmi", "avg")])
    print(f"wrote {out_root / 'sweep_summary.csv'}")
    return 0


# --- eval --------------------------------------------------------------------

def cmd_eval(args) -> int:
    pred = np.loadtxt(args.assignments, dtype=np.int64).reshape(-1)
    k = args.k or int(max(np.loadtxt(args.labels, dtype=np.int64).max(), pred.max())) + 1
    gt = data.read_labels(args.labels, k)
    report = metrics.evaluate(gt, pred, k=k)
    print(json.dumps(report.as_dict(), indent=2))
    return 0


# --- grad-check --------------------------------------------------------------

def cmd_grad_check(args) -> int:
    results = checks.grad_check_suite(seed=args.seed, tol=args.tol)
    failed = False
    for name, res in results.items():
        status = "pass" if res.passed else "FAIL"
        print(f"{name:16s} {status}  max_rel_err={res.max_rel_err:.3e}  ({res.worst})")
        failed |= not res.passed
    return 3 if failed else 0


# --- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="umclust",
                                description="Unsupervised multimodal clustering")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic dataset")
    s.add_argument("--out", required=True)
    s.add_argument("--classes", type=int, default=4)
    s.add_argument("--per-class", type=int, default=200)
    s.add_argument("--text-dim", type=int, default=32)
    s.add_argument("--video-dim", type=int, default=32)
    s.add_argument("--audio-dim", type=int, default=32)
    s.add_argument("--video-len", type=int, default=8)
    s.add_argument("--audio-len", type=int, default=8)
    s.add_argument("--separation", type=float, default=5.0)
    s.add_argument("--noise", type=float, default=1.0)
    s.add_argument("--ambiguous", default="",
                   help="text-identical class pairs, e.g. 0:1,2:3")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    r = sub.add_parser("run", help="run the full pipeline")
    r.add_argument("--config", required=True)
    r.add_argument("--seeds", help="comma-separated, overrides config")
    r.add_argument("--out", help="output dir, overrides config")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config entry")
    r.set_defaults(func=cmd_run)

    w = sub.add_parser("sweep", help="grid sweep of runs")
    w.add_argument("--config", required=True)
    w.add_argument("--out", required=True)
    w.add_argument("--seeds")
    w.add_argument("--set", action="append", metavar="KEY=VALUE")
    w.add_argument("--grid", action="append", metavar="KEY=V1,V2,...")
    w.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", help="score an assignments file")
    e.add_argument("--assignments", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--k", type=int)
    e.set_defaults(func=cmd_eval)

    g = sub.add_parser("grad-check", help="finite-difference gradient checks")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=1e-4)
    g.set_defaults(func=cmd_grad_check)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (FileNotFoundError, KeyError, BadGrid) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except UmclustError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except (FloatingPointError, ValueError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

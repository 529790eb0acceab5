"""Command-line surface: verify / train / sample / report / compare.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 training divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

# all matrices here are tiny; threaded BLAS only adds overhead and
# scheduling noise, so pin the pools before numpy loads its backend
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np

from . import __version__
from . import checkpoint as ckpt
from .identities import run_claim_suite, run_lemma_suite
from .manifolds import ManifoldSpec, MANIFOLD_IDS, coverage, read_samples_csv, residuals, write_samples_csv
from .plotting import save_comparison, save_history, save_scatter
from .train import TrainConfig, TrainingDiverged, gan_train, sample_generator

CONFIG_SCHEMA_VERSION = 1
_CONFIG_KEYS = {f.name for f in dataclasses.fields(TrainConfig)} | {"schema_version", "name"}

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_DIVERGED = 3


class ConfigError(ValueError):
    pass


def load_config(path) -> tuple[TrainConfig, str]:
    """Parse and validate a run config; returns (config, run name)."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.get("schema_version") != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {CONFIG_SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("manifold", "variant", "n_order", "width"):
        if key not in raw:
            raise ConfigError(f"{key}: required field is missing")
    kwargs = {k: v for k, v in raw.items() if k not in ("schema_version", "name")}
    try:
        cfg = TrainConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    name = raw.get("name") or f"{cfg.manifold}_{cfg.variant}_seed{cfg.seed}"
    return cfg, name


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def cmd_verify(args) -> int:
    reports = run_lemma_suite(seed=args.seed, tol=args.tol) + run_claim_suite(seed=args.seed, tol=args.tol)
    ok = True
    for report in reports:
        print(report.to_json())
        ok = ok and report.passed
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def run_training(cfg: TrainConfig, name: str, out_dir: Path, quiet: bool = False) -> dict:
    """Train, write all artifacts under `out_dir`, and return the summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _now()

    def progress(step, record):
        if not quiet and step % (cfg.eval_every * 10) == 0:
            print(f"[{name}] step {step}: loss_d={record['loss_d']:.4f} loss_g={record['loss_g']:.4f} residual={record['mean_residual']:.4g}", file=sys.stderr)

    result = gan_train(cfg, progress=progress)
    spec = cfg.manifold_spec()
    points = sample_generator(result.generator, cfg.sample_n, seed=cfg.seed + 1)
    res = residuals(spec, points)
    summary = {
        "name": name,
        "manifold": cfg.manifold,
        "variant": cfg.variant,
        "mean_residual": float(np.mean(res)),
        "median_residual": float(np.median(res)),
        "coverage": coverage(spec, points),
    }

    paths = {
        "checkpoint": out_dir / "checkpoint.json",
        "history": out_dir / "history.json",
        "samples": out_dir / "samples.csv",
        "samples_fig": out_dir / "samples.png",
        "training_fig": out_dir / "training.png",
        "manifest": out_dir / "manifest.json",
    }
    ckpt.save(paths["checkpoint"], ckpt.generator_to_dict(result.generator))
    with open(paths["history"], "w") as fh:
        json.dump({"history": result.history, "summary": summary}, fh)
        fh.write("\n")
    write_samples_csv(paths["samples"], points)
    save_scatter(points, paths["samples_fig"], spec=spec, title=name)
    save_history(result.history, paths["training_fig"], title=name)
    manifest = {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "name": name,
        "version": __version__,
        "seed": cfg.seed,
        "config": result.metadata["config"],
        "rng": result.metadata["rng"],
        "started": started,
        "finished": _now(),
        "outputs": {key: str(path) for key, path in paths.items() if key != "manifest"},
    }
    with open(paths["manifest"], "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return summary


def cmd_train(args) -> int:
    try:
        cfg, name = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out_dir = Path(args.out) if args.out else Path("runs") / name
    try:
        summary = run_training(cfg, name, out_dir, quiet=args.quiet)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    print(json.dumps(summary))
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.n < 0:
        print("error: n must be >= 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        gen = ckpt.load_generator(args.ckpt)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    points = sample_generator(gen, args.n, args.seed)
    if args.n == 0:
        # header-only file with the generator's output width
        points = np.zeros((0, gen.out_dim))
    write_samples_csv(args.out, points)
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        spec = ManifoldSpec(id=args.manifold, alpha=args.alpha, astroid_full=args.astroid_full)
        points = read_samples_csv(getattr(args, "in"))
        if points.shape[1] != spec.dim:
            raise ValueError(f"samples are {points.shape[1]}-dimensional but manifold {spec.id} is {spec.dim}-dimensional")
        if args.bins < 2:
            raise ValueError("bins must be >= 2")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    res = residuals(spec, points) if len(points) else np.asarray([])
    out = {
        "mean_residual": float(np.mean(res)) if res.size else None,
        "median_residual": float(np.median(res)) if res.size else None,
        "coverage": coverage(spec, points, bins=args.bins),
    }
    fig_path = args.fig or str(Path(getattr(args, "in")).with_suffix("")) + "_report.png"
    save_scatter(points, fig_path, spec=spec)
    print(json.dumps(out))
    return EXIT_OK


def cmd_compare(args) -> int:
    rows = []
    out_dir = Path(args.out)
    for config_path in args.configs:
        try:
            cfg, name = load_config(config_path)
        except ConfigError as exc:
            print(f"config error in {config_path}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        if args.steps:
            cfg.steps = args.steps
        try:
            summary = run_training(cfg, name, out_dir / name, quiet=args.quiet)
        except TrainingDiverged as exc:
            print(f"error in {config_path}: {exc}", file=sys.stderr)
            return EXIT_DIVERGED
        summary["label"] = name
        rows.append(summary)
        print(json.dumps(summary))
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "comparison.json", "w") as fh:
        json.dump({"runs": rows}, fh, indent=2)
        fh.write("\n")
    save_comparison(rows, out_dir / "comparison.png", title="model comparison")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polygen", description=__doc__)
    parser.add_argument("--version", action="version", version=f"polygen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the algebraic identity suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("train", help="run one adversarial training job from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory (default runs/<name>)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="draw samples from a trained checkpoint into a CSV")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("report", help="score a sample CSV against a manifold")
    p.add_argument("--in", required=True)
    p.add_argument("--manifold", required=True, choices=MANIFOLD_IDS)
    p.add_argument("--bins", type=int, default=16)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--astroid-full", action="store_true", dest="astroid_full")
    p.add_argument("--fig", default=None, help="figure path (default <in>_report.png)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("compare", help="train several configs and emit a side-by-side report")
    p.add_argument("--configs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=None, help="override steps in every config")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

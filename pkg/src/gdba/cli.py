"""Command-line front end: score, sweep, compare and verify subcommands.

Option precedence is flags > GDBA_* environment variables > --config JSON
file > built-in defaults. All output files are deterministic for a fixed
configuration; seeds are explicit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .data import DEFAULT_LABEL_COLUMN, as_dataset, load_csv, standardize
from .errors import GdbaError, InvalidGrid
from .evaluation import (
    DEFAULT_GRID,
    DETECTOR_NAMES,
    DetectorSpec,
    auc,
    compare,
    sigma_sweep,
)
from .kernel import DEFAULT_BLOCK_SIZE, DEFAULT_SIGMA
from .oracles import run_identity_suite
from .scoring import write_scores_csv

_ENV_PREFIX = "GDBA_"

_DEFAULTS = {
    "detector": "gdba",
    "sigma": DEFAULT_SIGMA,
    "k": 10,
    "k_clusters": 10,
    "seed": 0,
    "block_size": DEFAULT_BLOCK_SIZE,
    "threads": None,  # resolved to available parallelism
    "label_column": DEFAULT_LABEL_COLUMN,
    "grid": f"{DEFAULT_GRID[0]}:{DEFAULT_GRID[2]}:{DEFAULT_GRID[1]}",
}

_CASTS = {
    "sigma": float,
    "k": int,
    "k_clusters": int,
    "seed": int,
    "block_size": int,
    "threads": int,
}


class _Options:
    """Resolve option values by precedence and remember their source."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._config = {}
        config_path = self._args.get("config")
        if config_path:
            self._config = json.loads(Path(config_path).read_text(encoding="utf-8"))
            if not isinstance(self._config, dict):
                raise GdbaError(f"config file {config_path} must hold a JSON object")

    def get(self, name: str):
        value, _ = self.get_with_source(name)
        return value

    def get_with_source(self, name: str) -> tuple[object, str]:
        cast = _CASTS.get(name, str)
        flag = self._args.get(name)
        if flag is not None:
            return flag, "flag"
        env = os.environ.get(_ENV_PREFIX + name.upper())
        if env is not None:
            return cast(env), "env"
        if name in self._config:
            return cast(self._config[name]), "config"
        default = _DEFAULTS.get(name)
        if name == "threads" and default is None:
            default = os.cpu_count() or 1
        return default, "default"


def _parse_grid(text: str) -> tuple[float, float, float]:
    """Parse a start:step:stop grid spec into (start, stop, step)."""
    parts = text.split(":") if text else []
    if len(parts) != 3:
        raise InvalidGrid(f"grid must be start:step:stop, got {text!r}")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError:
        raise InvalidGrid(f"grid values must be numbers, got {text!r}") from None
    return (start, stop, step)


def _load_dataset(path: str, opts: _Options, raw: bool):
    label_column, source = opts.get_with_source("label_column")
    if source == "default":
        # fall back to unlabeled when the conventional column is missing
        with open(path, encoding="utf-8", newline="") as fh:
            header = fh.readline()
        names = [h.strip().strip('"') for h in header.rstrip("\r\n").split(",")]
        if label_column not in names:
            label_column = None
    table = load_csv(path, label_column=label_column)
    return as_dataset(table) if raw else standardize(table)


def _detector_spec(name: str, opts: _Options) -> DetectorSpec:
    if name not in DETECTOR_NAMES:
        raise GdbaError(
            f"unknown detector {name!r}; usage: --detector {{{','.join(DETECTOR_NAMES)}}}"
        )
    return DetectorSpec(
        name=name,
        sigma=opts.get("sigma"),
        k=opts.get("k"),
        k_clusters=opts.get("k_clusters"),
        seed=opts.get("seed"),
    )


def _cmd_score(args: argparse.Namespace) -> int:
    opts = _Options(args)
    data = _load_dataset(args.dataset, opts, raw=args.no_standardize)
    spec = _detector_spec(opts.get("detector"), opts)
    scores = spec.run(
        data, block_size=opts.get("block_size"), n_threads=opts.get("threads")
    )
    write_scores_csv(args.out, scores, labels=data.labels)
    if data.labels is not None:
        result = auc(scores, data.labels)
        print(
            f"auc={result.auc:.6f} detector={scores.detector} "
            f"params={scores.params_digest} n={len(scores)}",
            file=sys.stderr,
        )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    opts = _Options(args)
    data = _load_dataset(args.dataset, opts, raw=args.no_standardize)
    grid = _parse_grid(opts.get("grid"))
    report = sigma_sweep(
        data,
        grid=grid,
        block_size=opts.get("block_size"),
        n_threads=opts.get("threads"),
    )
    out = Path(args.out)
    report.write_csv(out.with_suffix(".csv"))
    report.write_json(out.with_suffix(".json"))
    robust = (
        f" robust_mean={report.robust_mean:.4f} robust_std={report.robust_std:.4f}"
        if report.robust_mean is not None
        else ""
    )
    print(
        f"best_sigma={report.best_sigma:g} best_auc={report.best_auc:.6f}{robust}",
        file=sys.stderr,
    )
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    opts = _Options(args)
    datasets = {}
    for path in args.dataset:
        name = Path(path).stem
        datasets[name] = _load_dataset(path, opts, raw=args.no_standardize)
    names = args.detector or list(DETECTOR_NAMES)
    detectors = [_detector_spec(n, opts) for n in names]
    report = compare(
        datasets,
        detectors,
        block_size=opts.get("block_size"),
        n_threads=opts.get("threads"),
    )
    out = Path(args.out)
    report.write_csv(out.with_suffix(".csv"))
    report.write_json(out.with_suffix(".json"))
    for label, avg in zip(report.detector_labels, report.averages):
        print(f"{label} average_auc={avg:.6f}", file=sys.stderr)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    opts = _Options(args)
    checks = run_identity_suite(
        seed=opts.get("seed"), inject_fault=args.inject_fault
    )
    failed = [c for c in checks if not c.passed]
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(
            f"{status} {check.name}: max_residual={check.max_residual:.3e} "
            f"tolerance={check.tolerance:.0e}"
        )
    if failed:
        print(
            "verification failed: " + ", ".join(c.name for c in failed),
            file=sys.stderr,
        )
        return 1
    return 0


def _add_common(parser: argparse.ArgumentParser, *names: str) -> None:
    options = {
        "label_column": lambda p: p.add_argument(
            "--label-column", dest="label_column",
            help="name of the binary anomaly column (default: label)",
        ),
        "detector": lambda p: p.add_argument(
            "--detector", help=f"one of {', '.join(DETECTOR_NAMES)} (default: gdba)"
        ),
        "sigma": lambda p: p.add_argument(
            "--sigma", type=float, help="RBF bandwidth (default: 0.15)"
        ),
        "k": lambda p: p.add_argument(
            "--k", type=int, help="neighbor count for knn/kthnn/lof (default: 10)"
        ),
        "k_clusters": lambda p: p.add_argument(
            "--k-clusters", dest="k_clusters", type=int,
            help="cluster count for ldcof (default: 10)",
        ),
        "seed": lambda p: p.add_argument(
            "--seed", type=int, help="random seed (default: 0)"
        ),
        "block_size": lambda p: p.add_argument(
            "--block-size", dest="block_size", type=int,
            help="tile size for the blocked degree path (default: 1024)",
        ),
        "threads": lambda p: p.add_argument(
            "--threads", type=int,
            help="worker cap for blocked computation (default: available cores)",
        ),
        "grid": lambda p: p.add_argument(
            "--grid", help="sigma grid as start:step:stop (default: 0.005:0.005:1.0)"
        ),
        "no_standardize": lambda p: p.add_argument(
            "--no-standardize", action="store_true",
            help="score raw feature columns without z-scoring",
        ),
        "config": lambda p: p.add_argument(
            "--config", help="JSON file with default option values"
        ),
    }
    for name in names:
        options[name](parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdba",
        description=(
            "Graph-degree-based unsupervised anomaly detection on fully "
            "connected RBF-kernel similarity graphs."
        ),
    )
    parser.add_argument("--version", action="version", version=f"gdba {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score one dataset and write a CSV")
    p_score.add_argument("--dataset", required=True, help="input CSV path")
    p_score.add_argument("--out", required=True, help="output score CSV path")
    _add_common(
        p_score, "label_column", "detector", "sigma", "k", "k_clusters",
        "seed", "block_size", "threads", "no_standardize", "config",
    )
    p_score.set_defaults(func=_cmd_score)

    p_sweep = sub.add_parser("sweep", help="grid-search sigma and report AUCs")
    p_sweep.add_argument("--dataset", required=True, help="input CSV path")
    p_sweep.add_argument(
        "--out", required=True, help="output path prefix (writes .csv and .json)"
    )
    _add_common(
        p_sweep, "label_column", "grid", "block_size", "threads",
        "no_standardize", "config",
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_compare = sub.add_parser("compare", help="AUC table of detectors x datasets")
    p_compare.add_argument(
        "--dataset", action="append", required=True, help="input CSV (repeatable)"
    )
    p_compare.add_argument(
        "--detector", action="append",
        help=f"detector name, repeatable (default: all of {', '.join(DETECTOR_NAMES)})",
    )
    p_compare.add_argument(
        "--out", required=True, help="output path prefix (writes .csv and .json)"
    )
    _add_common(
        p_compare, "label_column", "sigma", "k", "k_clusters", "seed",
        "block_size", "threads", "no_standardize", "config",
    )
    p_compare.set_defaults(func=_cmd_compare)

    p_verify = sub.add_parser(
        "verify", help="run the spectral and discrepancy identity checks"
    )
    _add_common(p_verify, "seed", "config")
    p_verify.add_argument(
        "--inject-fault", action="store_true", help=argparse.SUPPRESS
    )
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GdbaError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

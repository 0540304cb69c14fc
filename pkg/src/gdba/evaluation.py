"""ROC/AUC evaluation, the sigma sweep driver and detector comparisons.

AUC is computed from the Mann-Whitney rank statistic with mid-ranks for
tied scores; the tie-aware ROC curve (one step per distinct score) has
exactly the same trapezoidal area, and both agree with the brute-force
pairwise definition, which the test suite asserts.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.stats import rankdata

from .baselines import kthnn_score, knn_score, ldcof_score, lof_score
from .data import Dataset
from .errors import InvalidGrid, SingleClass
from .kernel import DEFAULT_BLOCK_SIZE, DEFAULT_SIGMA, KernelParams
from .scoring import ScoreVector, gdba_score

DEFAULT_GRID = (0.005, 1.0, 0.005)
ROBUST_SIGMA_INTERVAL = (0.02, 0.2)
DETECTOR_NAMES = ("gdba", "knn", "kthnn", "lof", "ldcof")

_GRID_EPS = 1e-9


@dataclass(frozen=True)
class RocCurve:
    """Tie-aware ROC points from (0,0) to (1,1), both coordinates
    non-decreasing; thresholds are implicit by descending score."""

    points: np.ndarray  # (m, 2) columns: false positive rate, true positive rate

    def trapezoid_area(self) -> float:
        fpr = self.points[:, 0]
        tpr = self.points[:, 1]
        return float(np.trapezoid(tpr, fpr))


@dataclass(frozen=True)
class AucResult:
    auc: float
    n_pos: int
    n_neg: int
    detector: str = ""
    params_digest: str = ""


@dataclass(frozen=True)
class SweepReport:
    """AUC of the degree detector across a sigma grid.

    robust_mean/robust_std summarize the rows with sigma in
    ROBUST_SIGMA_INTERVAL (population std); they are None when the grid
    does not touch that interval.
    """

    sigmas: np.ndarray
    aucs: np.ndarray
    grid: tuple[float, float, float]
    best_sigma: float
    best_auc: float
    robust_mean: float | None
    robust_std: float | None

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sigma", "auc"])
            for s, a in zip(self.sigmas, self.aucs):
                writer.writerow([format(s, ".17g"), format(a, ".17g")])

    def to_dict(self) -> dict:
        return {
            "grid": {"start": self.grid[0], "stop": self.grid[1], "step": self.grid[2]},
            "best_sigma": self.best_sigma,
            "best_auc": self.best_auc,
            "robust_interval": list(ROBUST_SIGMA_INTERVAL),
            "robust_mean": self.robust_mean,
            "robust_std": self.robust_std,
            "rows": [
                {"sigma": float(s), "auc": float(a)}
                for s, a in zip(self.sigmas, self.aucs)
            ],
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")


def _score_values(scores) -> np.ndarray:
    if isinstance(scores, ScoreVector):
        return scores.scores
    return np.asarray(scores, dtype=np.float64)


def _check_labels(scores: np.ndarray, labels) -> tuple[np.ndarray, int, int]:
    if labels is None:
        raise SingleClass("evaluation requires labels")
    y = np.asarray(labels)
    if y.shape != scores.shape:
        raise ValueError("scores and labels must have equal length")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClass(
            f"need both classes, got {n_pos} anomalies and {n_neg} normals"
        )
    return y, n_pos, n_neg


def auc(scores, labels) -> AucResult:
    """Area under the ROC curve via the Mann-Whitney rank statistic.

    Anomalies (label 1) are the positive class; tied scores receive
    mid-ranks, which matches the trapezoidal area through tie groups.
    """
    s = _score_values(scores)
    y, n_pos, n_neg = _check_labels(s, labels)
    ranks = rankdata(s, method="average")
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return AucResult(
        auc=float(u / (n_pos * n_neg)),
        n_pos=n_pos,
        n_neg=n_neg,
        detector=getattr(scores, "detector", ""),
        params_digest=getattr(scores, "params_digest", ""),
    )


def roc_curve(scores, labels) -> RocCurve:
    """Tie-aware ROC curve, one point per distinct score threshold."""
    s = _score_values(scores)
    y, n_pos, n_neg = _check_labels(s, labels)
    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    s_sorted = s[order]
    # indices closing each group of equal scores (thresholds descending)
    boundaries = np.flatnonzero(np.diff(s_sorted) != 0)
    boundaries = np.append(boundaries, len(s_sorted) - 1)
    tp = np.cumsum(y_sorted)[boundaries]
    fp = boundaries + 1 - tp
    points = np.empty((len(boundaries) + 1, 2))
    points[0] = (0.0, 0.0)
    points[1:, 0] = fp / n_neg
    points[1:, 1] = tp / n_pos
    return RocCurve(points=points)


def grid_values(grid: tuple[float, float, float]) -> np.ndarray:
    """Expand (start, stop, step) into inclusive sigma values."""
    start, stop, step = grid
    if not (np.isfinite(start) and np.isfinite(stop) and np.isfinite(step)):
        raise InvalidGrid(f"grid values must be finite, got {grid}")
    if start <= 0 or step <= 0 or stop < start:
        raise InvalidGrid(
            f"grid must satisfy 0 < start <= stop with step > 0, got {grid}"
        )
    count = int(np.floor((stop - start) / step + _GRID_EPS)) + 1
    return start + step * np.arange(count)


def sigma_sweep(
    data: Dataset,
    grid: tuple[float, float, float] = DEFAULT_GRID,
    block_size: int = DEFAULT_BLOCK_SIZE,
    n_threads: int = 1,
) -> SweepReport:
    """Evaluate the degree detector's AUC at every sigma on the grid.

    Grid cells are independent and run on up to n_threads workers; results
    are gathered by cell index, so the report does not depend on worker
    scheduling. Ties for the best AUC resolve to the smallest sigma. The
    robustness summary covers the rows with sigma in [0.02, 0.2].
    """
    sigmas = grid_values(grid)
    aucs = np.empty(len(sigmas))

    def cell(i: int) -> None:
        scores = gdba_score(data, KernelParams(sigma=float(sigmas[i])), block_size)
        aucs[i] = auc(scores, data.labels).auc

    if n_threads > 1 and len(sigmas) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(cell, range(len(sigmas))))
    else:
        for i in range(len(sigmas)):
            cell(i)
    best = int(np.argmax(aucs))
    lo, hi = ROBUST_SIGMA_INTERVAL
    in_interval = (sigmas >= lo - _GRID_EPS) & (sigmas <= hi + _GRID_EPS)
    robust_mean = float(aucs[in_interval].mean()) if in_interval.any() else None
    robust_std = float(aucs[in_interval].std()) if in_interval.any() else None
    return SweepReport(
        sigmas=sigmas,
        aucs=aucs,
        grid=grid,
        best_sigma=float(sigmas[best]),
        best_auc=float(aucs[best]),
        robust_mean=robust_mean,
        robust_std=robust_std,
    )


@dataclass(frozen=True)
class DetectorSpec:
    """A named detector plus the parameters it needs.

    Unused parameters are ignored (e.g. sigma for knn), so one spec type
    covers all five detectors.
    """

    name: str
    sigma: float = DEFAULT_SIGMA
    k: int = 10
    k_clusters: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.name not in DETECTOR_NAMES:
            raise ValueError(
                f"unknown detector {self.name!r} (choose from {', '.join(DETECTOR_NAMES)})"
            )

    def label(self) -> str:
        if self.name == "gdba":
            return f"gdba(sigma={self.sigma:g})"
        if self.name == "ldcof":
            return f"ldcof(k_clusters={self.k_clusters})"
        return f"{self.name}(k={self.k})"

    def run(
        self, data: Dataset, block_size: int = DEFAULT_BLOCK_SIZE, n_threads: int = 1
    ) -> ScoreVector:
        if self.name == "gdba":
            return gdba_score(
                data, KernelParams(sigma=self.sigma), block_size, n_threads=n_threads
            )
        if self.name == "knn":
            return knn_score(data, self.k)
        if self.name == "kthnn":
            return kthnn_score(data, self.k)
        if self.name == "lof":
            return lof_score(data, self.k)
        return ldcof_score(data, self.k_clusters, seed=self.seed)


@dataclass(frozen=True)
class ComparisonReport:
    """Detector x dataset AUC matrix with per-detector averages.

    Wall time per cell is recorded in seconds and serialized in the JSON
    report only, keeping the CSV byte-stable across runs.
    """

    dataset_names: list[str]
    detector_labels: list[str]
    aucs: np.ndarray  # (n_detectors, n_datasets)
    seconds: np.ndarray  # (n_detectors, n_datasets)
    averages: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "averages", self.aucs.mean(axis=1))

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["detector", "dataset", "auc"])
            for i, det in enumerate(self.detector_labels):
                for j, ds in enumerate(self.dataset_names):
                    writer.writerow([det, ds, format(self.aucs[i, j], ".17g")])
                writer.writerow([det, "average", format(self.averages[i], ".17g")])

    def to_dict(self) -> dict:
        return {
            "datasets": {
                ds: {
                    det: {
                        "auc": float(self.aucs[i, j]),
                        "seconds": float(self.seconds[i, j]),
                    }
                    for i, det in enumerate(self.detector_labels)
                }
                for j, ds in enumerate(self.dataset_names)
            },
            "averages": {
                det: float(self.averages[i])
                for i, det in enumerate(self.detector_labels)
            },
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")


def compare(
    datasets: Mapping[str, Dataset],
    detectors: list[DetectorSpec],
    block_size: int = DEFAULT_BLOCK_SIZE,
    n_threads: int = 1,
) -> ComparisonReport:
    """Score every detector on every dataset and collect AUCs.

    (detector, dataset) cells are independent and run on up to n_threads
    workers, gathered by cell key.
    """
    names = list(datasets)
    labels = [d.label() for d in detectors]
    aucs = np.empty((len(detectors), len(names)))
    seconds = np.empty_like(aucs)

    def cell(key: tuple[int, int]) -> None:
        i, j = key
        ds = datasets[names[j]]
        start = time.perf_counter()
        scores = detectors[i].run(ds, block_size=block_size)
        aucs[i, j] = auc(scores, ds.labels).auc
        seconds[i, j] = time.perf_counter() - start

    keys = [(i, j) for i in range(len(detectors)) for j in range(len(names))]
    if n_threads > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(cell, keys))
    else:
        for key in keys:
            cell(key)
    return ComparisonReport(
        dataset_names=names, detector_labels=labels, aucs=aucs, seconds=seconds
    )

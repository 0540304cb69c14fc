"""Anomaly scores from graph degrees, plus the shared score conventions.

Every detector in this package emits a ScoreVector where HIGHER means MORE
anomalous. The degree-based score negates the degree; negation is rank
equivalent to the reciprocal for the always-positive degrees, and AUC (the
only evaluation metric) is rank based.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .kernel import DEFAULT_BLOCK_SIZE, KernelParams, degree


@dataclass(frozen=True)
class ScoreVector:
    """Per-sample anomaly scores (higher = more anomalous)."""

    scores: np.ndarray
    detector: str
    params_digest: str = ""

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.ndim != 1:
            raise ValueError("scores must be a 1-D vector")
        if not np.isfinite(s).all():
            raise ValueError("scores must be finite")
        object.__setattr__(self, "scores", s)

    def __len__(self) -> int:
        return len(self.scores)


def params_digest(**params) -> str:
    """Stable key=value digest for score provenance."""
    return ",".join(f"{k}={params[k]}" for k in sorted(params))


def gdba_score(
    data: Dataset,
    params: KernelParams | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
    n_threads: int = 1,
) -> ScoreVector:
    """Degree-based anomaly score: the negated graph degree."""
    if params is None:
        params = KernelParams()
    nu = degree(data, params, block_size=block_size, n_threads=n_threads)
    return ScoreVector(
        scores=-nu.values,
        detector="gdba",
        params_digest=params_digest(
            sigma=params.sigma,
            dim_normalize=params.dim_normalize,
            block_size=block_size,
        ),
    )


def write_scores_csv(path, scores: ScoreVector, labels=None) -> None:
    """Serialize scores as CSV with columns row_index, score[, label].

    The label column is omitted when labels is None. Scores are printed
    with 17 significant digits so output is byte-stable across runs.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if labels is None:
            writer.writerow(["row_index", "score"])
            for i, s in enumerate(scores.scores):
                writer.writerow([i, format(s, ".17g")])
        else:
            labels = np.asarray(labels)
            writer.writerow(["row_index", "score", "label"])
            for i, s in enumerate(scores.scores):
                writer.writerow([i, format(s, ".17g"), int(labels[i])])


def read_scores_csv(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Read a score CSV back into (scores, labels); labels may be None.

    Rows are returned in row_index order regardless of file order.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        has_labels = "label" in header
        rows = [(int(r[0]), float(r[1]), int(r[2]) if has_labels else 0) for r in reader]
    rows.sort()
    scores = np.array([r[1] for r in rows])
    labels = np.array([r[2] for r in rows], dtype=np.int64) if has_labels else None
    return scores, labels

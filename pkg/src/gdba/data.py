"""Tabular dataset loading, validation, standardization and the 2-D toy set.

CSV convention: comma separated, first row is a header, UTF-8, '.' decimal
separator. One column may hold binary anomaly labels (1 = anomaly); all
other columns must parse as finite reals.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyDataset,
    InvalidLabel,
    MissingLabelColumn,
    NonFiniteValue,
    NonNumericCell,
    RaggedRow,
)

DEFAULT_LABEL_COLUMN = "label"

# Strict decimal literal: rejects "NaN", "inf", "1_0" and other float()
# extensions so that non-numeric cells are reported as such.
_NUMERIC_RE = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


def _freeze(a: np.ndarray) -> np.ndarray:
    # own copy so the caller's array is never locked read-only
    a = np.array(a, order="C", copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RawTable:
    """Validated but untransformed feature table.

    features: (n, d) float64, all finite.
    labels:   (n,) int with values in {0, 1}, or None for unlabeled data.
    """

    features: np.ndarray
    labels: np.ndarray | None
    column_names: list[str]
    label_name: str | None = DEFAULT_LABEL_COLUMN

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[1] < 1:
            raise ValueError("features must be a 2-D matrix with at least one column")
        if feats.shape[0] < 1:
            raise EmptyDataset("table has no data rows")
        if not np.isfinite(feats).all():
            raise ValueError("features contain NaN or Inf")
        object.__setattr__(self, "features", _freeze(feats))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (feats.shape[0],):
                raise ValueError("labels length does not match feature rows")
            if not np.isin(labels, (0, 1)).all():
                raise ValueError("labels must be 0 or 1")
            object.__setattr__(self, "labels", _freeze(labels))
        if len(self.column_names) != feats.shape[1]:
            raise ValueError("column_names length does not match feature columns")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class Standardization:
    """Per-column centering/scaling record: z = (x - mean) / divisor.

    Constant columns keep divisor 1 and are marked in constant_mask.
    """

    means: np.ndarray
    divisors: np.ndarray
    constant_mask: np.ndarray


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix plus optional labels.

    The scoring pipeline normally standardizes features first; `scaling`
    records the transform that was applied (None if features are raw).
    """

    features: np.ndarray
    labels: np.ndarray | None = None
    column_names: list[str] | None = None
    label_name: str | None = DEFAULT_LABEL_COLUMN
    scaling: Standardization | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[1] < 1:
            raise ValueError("features must be a 2-D matrix with at least one column")
        if feats.shape[0] < 1:
            raise EmptyDataset("dataset has no samples")
        if not np.isfinite(feats).all():
            raise ValueError("features contain NaN or Inf")
        object.__setattr__(self, "features", _freeze(feats))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (feats.shape[0],):
                raise ValueError("labels length does not match feature rows")
            if not np.isin(labels, (0, 1)).all():
                raise ValueError("labels must be 0 or 1")
            object.__setattr__(self, "labels", _freeze(labels))
        if self.column_names is None:
            names = [f"f{i}" for i in range(feats.shape[1])]
            object.__setattr__(self, "column_names", names)
        elif len(self.column_names) != feats.shape[1]:
            raise ValueError("column_names length does not match feature columns")

    @classmethod
    def from_features(cls, features, labels=None) -> "Dataset":
        return cls(features=np.asarray(features, dtype=np.float64), labels=labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def load_csv(path, label_column: str | None = DEFAULT_LABEL_COLUMN) -> RawTable:
    """Load and validate a CSV file.

    label_column selects the binary anomaly column by name; pass None to
    load an unlabeled table. Raises MissingLabelColumn, NonNumericCell,
    NonFiniteValue, InvalidLabel, RaggedRow or EmptyDataset on bad input.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path} is empty") from None
        header = [h.strip() for h in header]

        label_idx: int | None = None
        if label_column is not None:
            if label_column not in header:
                raise MissingLabelColumn(label_column, header)
            label_idx = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]

        rows: list[list[float]] = []
        labels: list[int] = []
        for r, cells in enumerate(reader):
            if len(cells) != len(header):
                raise RaggedRow(r, len(header), len(cells))
            feats = []
            for c, cell in enumerate(cells):
                text = cell.strip()
                if c == label_idx:
                    if not _NUMERIC_RE.match(text):
                        raise InvalidLabel(r, text)
                    value = float(text)
                    if value not in (0.0, 1.0):
                        raise InvalidLabel(r, text)
                    labels.append(int(value))
                else:
                    name = header[c]
                    if not _NUMERIC_RE.match(text):
                        raise NonNumericCell(r, name, text)
                    value = float(text)
                    if not math.isfinite(value):
                        raise NonFiniteValue(r, name, text)
                    feats.append(value)
            rows.append(feats)

    if not rows:
        raise EmptyDataset(f"{path} has a header but no data rows")
    return RawTable(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64) if label_idx is not None else None,
        column_names=feature_names,
        label_name=label_column,
    )


def write_csv(data: RawTable | Dataset, path) -> None:
    """Write a table or dataset to CSV with 17 significant digits.

    The format round-trips bit-exactly through load_csv.
    """
    path = Path(path)
    names = list(data.column_names)
    has_labels = data.labels is not None
    if has_labels:
        names = names + [data.label_name or DEFAULT_LABEL_COLUMN]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(data.features.shape[0]):
            row = [format(v, ".17g") for v in data.features[i]]
            if has_labels:
                row.append(str(int(data.labels[i])))
            writer.writerow(row)


def standardize(table: RawTable | Dataset) -> Dataset:
    """Z-score each column using the population standard deviation.

    Columns whose values are all identical are centered only (divisor
    forced to 1) and flagged constant in the returned scaling record.
    """
    feats = table.features
    constant = (feats == feats[0]).all(axis=0)
    means = np.where(constant, feats[0], feats.mean(axis=0))
    stds = feats.std(axis=0)
    divisors = np.where(constant, 1.0, stds)
    z = (feats - means) / divisors
    return Dataset(
        features=z,
        labels=table.labels,
        column_names=list(table.column_names),
        label_name=table.label_name,
        scaling=Standardization(
            means=_freeze(means), divisors=_freeze(divisors), constant_mask=_freeze(constant)
        ),
    )


def as_dataset(table: RawTable) -> Dataset:
    """Wrap a validated table as a Dataset without rescaling features."""
    return Dataset(
        features=table.features,
        labels=table.labels,
        column_names=list(table.column_names),
        label_name=table.label_name,
        scaling=None,
    )


def make_toy_fig2(seed: int = 0) -> Dataset:
    """Two-cluster 2-D toy set with one planted local anomaly.

    15 points in a tight Gaussian cluster at the origin (scale 0.03), 15 in
    a looser cluster at (1.5, 0) (scale 0.12), and a single anomaly at
    (0.35, 0) close to the tight cluster but clearly outside it. Features
    are raw coordinates (not standardized); only the planted point is
    labeled anomalous. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    tight = rng.normal(loc=(0.0, 0.0), scale=0.03, size=(15, 2))
    loose = rng.normal(loc=(1.5, 0.0), scale=0.12, size=(15, 2))
    anomaly = np.array([[0.35, 0.0]])
    features = np.vstack([tight, loose, anomaly])
    labels = np.zeros(len(features), dtype=np.int64)
    labels[-1] = 1
    return Dataset(
        features=features,
        labels=labels,
        column_names=["x", "y"],
        label_name=DEFAULT_LABEL_COLUMN,
        scaling=None,
    )

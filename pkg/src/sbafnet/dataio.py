"""CSV loading, min-max normalisation, synthetic datasets and stratified splits."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "FEATURE_LOW",
    "FEATURE_HIGH",
    "RawTable",
    "Dataset",
    "load_csv",
    "normalize",
    "apply_normalization",
    "synthesize",
    "split",
    "format_csv",
    "write_csv",
]

FEATURE_LOW = 0.01
FEATURE_HIGH = 0.99


@dataclass
class RawTable:
    feature_names: list[str]
    features: np.ndarray
    labels: list[str]
    label_name: str = "class"

    @property
    def n_samples(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Features in [0.01, 0.99], integer labels and the metadata to reproduce them.

    ``normalization`` holds one (min, max) row per feature, as observed in the
    raw data the dataset was built from.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: list[str]
    normalization: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.intp)
        if f.ndim != 2 or y.shape != (f.shape[0],):
            raise DataError("features must be 2-D with one label per row")
        if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise DataError("labels must index into class_names")
        if f.size and (f.min() < FEATURE_LOW or f.max() > FEATURE_HIGH):
            raise DataError(f"features must lie in [{FEATURE_LOW}, {FEATURE_HIGH}]")
        f.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", y)
        if not self.feature_names:
            object.__setattr__(self, "feature_names", [f"x{i}" for i in range(f.shape[1])])

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return replace(self, features=self.features[rows], labels=self.labels[rows])


def load_csv(path: str | os.PathLike, label_column: str) -> RawTable:
    """Read a headed, comma-separated file; every non-label column must be numeric."""
    try:
        fh = io.open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
        feature_idx = [i for i in range(len(header)) if i != label_idx]

        rows, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {line_no} has {len(row)} fields, header has {len(header)}")
            values = []
            for i in feature_idx:
                cell = row[i].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}: row {line_no}, column {header[i]!r}: cannot parse {cell!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: row {line_no}, column {header[i]!r}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
            labels.append(row[label_idx].strip())
    if not rows:
        raise DataError(f"{path}: empty dataset")
    features = np.array(rows, dtype=np.float64).reshape(len(rows), len(feature_idx))
    return RawTable([header[i] for i in feature_idx], features, labels, label_column)


def apply_normalization(values, normalization) -> np.ndarray:
    """Map raw values through stored (min, max) pairs onto [0.01, 0.99].

    Values outside the stored range are clamped to the interval ends;
    constant features (min == max) map to 0.5.
    """
    values = np.asarray(values, dtype=np.float64)
    norm = np.asarray(normalization, dtype=np.float64)
    lo, hi = norm[:, 0], norm[:, 1]
    span = hi - lo
    constant = span == 0
    scaled = (values - lo) / np.where(constant, 1.0, span)
    out = FEATURE_LOW + (FEATURE_HIGH - FEATURE_LOW) * scaled
    out = np.where(constant, 0.5, out)
    return np.clip(out, FEATURE_LOW, FEATURE_HIGH)


def normalize(raw: RawTable, class_names: Sequence[str] | None = None) -> Dataset:
    """Min-max scale each feature onto [0.01, 0.99] and encode labels.

    Labels get dense ids in order of first appearance unless ``class_names``
    fixes the mapping (as when scoring new data with a trained model).
    """
    if raw.n_samples == 0:
        raise DataError("empty dataset")
    norm = np.column_stack([raw.features.min(axis=0), raw.features.max(axis=0)])
    if class_names is None:
        names = list(dict.fromkeys(raw.labels))
    else:
        names = list(class_names)
        unknown = sorted(set(raw.labels) - set(names))
        if unknown:
            raise DataError(f"labels not seen in training: {unknown}")
    ids = {name: i for i, name in enumerate(names)}
    labels = np.array([ids[lab] for lab in raw.labels], dtype=np.intp)
    return Dataset(apply_normalization(raw.features, norm), labels, names, norm, list(raw.feature_names))


BLOB_CENTERS = ((0.3, 0.3), (0.7, 0.7))
BLOB_SPREAD = 0.06
HABITABILITY_CLASSES = ("psychroplanet", "mesoplanet", "non-habitable")


def _class_sizes(n: int, k: int) -> list[int]:
    return [n // k + (1 if i < n % k else 0) for i in range(k)]


def synthesize(kind: str, n_samples: int, seed: int, overlap: float = 0.5) -> Dataset:
    """Deterministic toy datasets.

    ``blobs2``: two isotropic Gaussian blobs centred at (0.3, 0.3) and
    (0.7, 0.7) with standard deviation 0.06.

    ``habitability3``: three classes along a temperature-like first feature.
    Psychroplanets sit at 0.3 and non-habitable planets at 0.85; mesoplanets
    sit between, at ``0.3 + 0.3 * (1 - overlap)``, so ``overlap`` in [0, 1]
    controls how much the psychro/meso pair blurs together. The second
    feature is a weakly informative flux-like reading.

    Features are clipped into [0.01, 0.99]. Normalisation metadata is the
    identity map on that interval.
    """
    n_classes = {"blobs2": 2, "habitability3": 3}.get(kind)
    if n_classes is None:
        raise ValueError(f"unknown synthetic dataset {kind!r}")
    if int(n_samples) != n_samples or n_samples < n_classes:
        raise ValueError(f"{kind} needs at least {n_classes} samples, got {n_samples}")
    rng = np.random.default_rng(seed)
    sizes = _class_sizes(int(n_samples), n_classes)

    if kind == "blobs2":
        names = ["a", "b"]
        parts = [rng.normal(c, BLOB_SPREAD, size=(m, 2)) for c, m in zip(BLOB_CENTERS, sizes)]
        feature_names = ["x0", "x1"]
    else:
        if not 0.0 <= overlap <= 1.0:
            raise ValueError(f"overlap must lie in [0, 1], got {overlap}")
        names = list(HABITABILITY_CLASSES)
        temp_centers = (0.3, 0.3 + 0.3 * (1.0 - overlap), 0.85)
        flux_centers = (0.4, 0.5, 0.6)
        parts = [
            np.column_stack([rng.normal(tc, 0.06, m), rng.normal(fc, 0.12, m)])
            for tc, fc, m in zip(temp_centers, flux_centers, sizes)
        ]
        feature_names = ["temperature", "flux"]

    features = np.clip(np.vstack(parts), FEATURE_LOW, FEATURE_HIGH)
    labels = np.repeat(np.arange(n_classes), sizes)
    identity = np.tile([FEATURE_LOW, FEATURE_HIGH], (features.shape[1], 1))
    return Dataset(features, labels, names, identity, feature_names)


def split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified split; each class contributes round(fraction * count) rows to train.

    Every class keeps at least one row on each side. Rows stay in their
    original order within each part.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_rows, test_rows = [], []
    for c in range(ds.n_classes):
        rows = np.flatnonzero(ds.labels == c)
        if rows.size == 0:
            continue
        if rows.size < 2:
            raise DataError(f"class {ds.class_names[c]!r} has {rows.size} sample; need at least 2 to split")
        rows = rng.permutation(rows)
        n_train = min(max(int(round(train_fraction * rows.size)), 1), rows.size - 1)
        train_rows.append(rows[:n_train])
        test_rows.append(rows[n_train:])
    train_idx = np.sort(np.concatenate(train_rows))
    test_idx = np.sort(np.concatenate(test_rows))
    return ds.subset(train_idx), ds.subset(test_idx)


def format_csv(ds: Dataset, label_column: str = "class") -> str:
    """Features to 17 significant digits, label column last."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*ds.feature_names, label_column])
    for row, label in zip(ds.features, ds.labels):
        writer.writerow([format(float(v), ".17g") for v in row] + [ds.class_names[label]])
    return buf.getvalue()


def write_csv(ds: Dataset, path: str | os.PathLike, label_column: str = "class") -> None:
    with io.open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(ds, label_column))

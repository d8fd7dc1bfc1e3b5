"""Loading, cleaning, standardizing and splitting labeled binary data.

The canonical on-disk format is a headerless CSV: the first column is the
label token (``+1``, ``1`` or ``-1``), the remaining columns are numeric
feature tokens, and ``?`` marks a missing value.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

MISSING_TOKEN = "?"
LABEL_TOKENS = {"+1": 1, "1": 1, "-1": -1}
VALIDATION_CAP = 50


class DatasetError(ValueError):
    """Raised when data cannot be loaded or prepared."""


class LoadError(DatasetError):
    pass


class PreprocessError(DatasetError):
    pass


class SplitError(DatasetError):
    pass


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    label: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``X`` (rows are samples, NaN marks missing) and ±1 labels ``y``."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise DatasetError(f"feature matrix must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DatasetError("label vector length must match number of samples")
        if y.size and not np.all(np.abs(y) == 1):
            raise DatasetError("labels must be -1 or +1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self) -> Iterator[Sample]:
        for x, label in zip(self.X, self.y):
            yield Sample(x, int(label))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.X.shape == other.X.shape
                and np.array_equal(self.X, other.X, equal_nan=True)
                and np.array_equal(self.y, other.y))

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.y == 1))

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.y == -1))

    @property
    def has_missing(self) -> np.ndarray:
        """Boolean mask of samples with at least one missing feature."""
        return np.isnan(self.X).any(axis=1)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.X[idx], self.y[idx])

    def content_hash(self) -> str:
        """SHA-256 over shape, feature bytes and label bytes."""
        h = hashlib.sha256()
        h.update(np.asarray(self.X.shape, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class SplitSpec:
    seed: int = 0
    cap: int = VALIDATION_CAP

    def validation_size(self, n_samples: int) -> int:
        return min(math.ceil(n_samples / 5), self.cap)


@dataclass(frozen=True)
class FoldPlan:
    fold_assignments: np.ndarray
    b: int

    def fold(self, k: int) -> np.ndarray:
        """Indices of the samples held out in fold ``k``."""
        return np.flatnonzero(self.fold_assignments == k)

    def complement(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignments != k)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_assignments, minlength=self.b)


def _parse_float(token: str, path, lineno: int) -> float:
    if token == MISSING_TOKEN:
        return math.nan
    try:
        value = float(token)
    except ValueError:
        raise LoadError(f"{path}:{lineno}: unparseable numeric token {token!r}") from None
    if math.isnan(value):
        raise LoadError(f"{path}:{lineno}: NaN is not a valid feature value, use '?'")
    return value


def load_csv(path) -> Dataset:
    """Read the canonical CSV format; rows stay in file order.

    Missing values are kept as NaN; :func:`preprocess` removes them.
    """
    path = Path(path)
    rows: list[list[float]] = []
    labels: list[int] = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = [t.strip() for t in line.split(",")]
            if width is None:
                width = len(tokens)
                if width < 2:
                    raise LoadError(f"{path}:{lineno}: need a label and at least one feature")
            elif len(tokens) != width:
                raise LoadError(
                    f"{path}:{lineno}: expected {width} columns, found {len(tokens)}")
            if tokens[0] not in LABEL_TOKENS:
                raise LoadError(f"{path}:{lineno}: unknown label token {tokens[0]!r}")
            labels.append(LABEL_TOKENS[tokens[0]])
            rows.append([_parse_float(t, path, lineno) for t in tokens[1:]])
    if not rows:
        raise LoadError(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64))


def preprocess(raw: Dataset) -> Dataset:
    """Drop samples with missing values, then every group of identical
    feature vectors whose members disagree on the label."""
    keep = ~raw.has_missing
    X, y = raw.X[keep], raw.y[keep]
    seen: dict[bytes, set[int]] = {}
    keys = [row.tobytes() for row in X]
    for key, label in zip(keys, y):
        seen.setdefault(key, set()).add(int(label))
    consistent = np.array([len(seen[key]) == 1 for key in keys], dtype=bool)
    out = Dataset(X[consistent] if len(X) else X, y[consistent] if len(y) else y)
    if len(out) == 0:
        raise PreprocessError("no samples left after preprocessing")
    if out.n_positive == 0 or out.n_negative == 0:
        raise PreprocessError("only one class left after preprocessing")
    return out


def standardize(train: Dataset, others: Sequence[Dataset] = ()) -> tuple[Dataset, list[Dataset]]:
    """Z-score every feature with the training mean and population sd.

    A feature that is constant on ``train`` maps to 0 in every set.
    """
    if len(train) == 0:
        raise DatasetError("cannot standardize with an empty training set")
    mean = train.X.mean(axis=0)
    sd = train.X.std(axis=0)
    constant = sd == 0
    scale = np.where(constant, 1.0, sd)

    def apply(d: Dataset) -> Dataset:
        Z = (d.X - mean) / scale
        Z[:, constant] = 0.0
        return Dataset(Z, d.y)

    return apply(train), [apply(d) for d in others]


def split_train_validation(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Seeded random split with validation size ``min(ceil(l/5), 50)``."""
    n_val = spec.validation_size(len(data))
    if n_val < 1 or len(data) - n_val < 2:
        raise SplitError(f"dataset of {len(data)} samples is too small to split")
    perm = np.random.default_rng(spec.seed).permutation(len(data))
    val_idx = np.sort(perm[:n_val])
    trn_idx = np.sort(perm[n_val:])
    train, val = data.subset(trn_idx), data.subset(val_idx)
    if train.n_positive == 0 or train.n_negative == 0:
        raise SplitError(f"training side is single-class for seed {spec.seed}")
    return train, val


def make_folds(data: Dataset, b: int = 10, seed: int = 0) -> FoldPlan:
    """Seeded balanced assignment of samples to ``b`` folds."""
    if b < 2:
        raise DatasetError("need at least 2 folds")
    if len(data) < b:
        raise DatasetError(f"cannot make {b} folds from {len(data)} samples")
    perm = np.random.default_rng(seed).permutation(len(data))
    assignments = np.empty(len(data), dtype=np.int64)
    assignments[perm] = np.arange(len(data)) % b
    return FoldPlan(assignments, b)

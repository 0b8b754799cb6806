"""Labeled feature vectors, file formats, fold planning and class balancing.

Two on-disk formats are supported.

CSV::

    # fvec v1 n=<N> d=<D> c=<C>
    label,f1,...,fD
    ...

Binary: magic ``FVEC1``, little-endian uint32 ``N, D, C``, then ``N`` records
of (uint32 label, ``D`` little-endian float32 values).
"""

from __future__ import annotations

import os
import re
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    HeaderError,
    LabelError,
    NonFiniteError,
    ParseError,
    RowLengthError,
    StratificationError,
)

CSV_HEADER = re.compile(r"^#\s*fvec\s+v1\s+n=(\d+)\s+d=(\d+)\s+c=(\d+)\s*$")
BINARY_MAGIC = b"FVEC1"


@dataclass(frozen=True)
class FeatureDataset:
    """Feature matrix (rows are samples) with integer class labels."""

    samples: np.ndarray
    labels: np.ndarray
    class_names: tuple = ()

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if samples.ndim != 2:
            raise ValueError(f"samples must be 2-D, got shape {samples.shape}")
        if samples.shape[0] == 0:
            raise ValueError("dataset must contain at least one sample")
        if labels.shape != (samples.shape[0],):
            raise ValueError(
                f"labels shape {labels.shape} does not match {samples.shape[0]} samples"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        names = tuple(self.class_names)
        if not names:
            names = tuple(f"class{c}" for c in range(int(labels.max()) + 1))
        if labels.min() < 0 or labels.max() >= len(names):
            raise ValueError(f"labels must lie in [0, {len(names)})")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def d(self):
        return self.samples.shape[1]

    @property
    def n_classes(self):
        return len(self.class_names)

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, index):
        index = np.asarray(index)
        return FeatureDataset(self.samples[index], self.labels[index], self.class_names)

    def with_samples(self, samples):
        """Same labels and class names, new feature matrix (e.g. after projection)."""
        return FeatureDataset(samples, self.labels, self.class_names)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def test_index(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_index(self, fold):
        return np.flatnonzero(self.assignments != fold)

    def split(self, fold):
        return self.train_index(fold), self.test_index(fold)

    def fold_seed(self, fold):
        return self.seed + fold


# ---------------------------------------------------------------------------
# file formats


def load_features(path, format=None):
    """Read a feature file. ``format`` is ``"csv"``, ``"binary"`` or inferred
    from the extension (``.csv`` / anything else is binary)."""
    path = os.fspath(path)
    if format is None:
        format = "csv" if path.lower().endswith(".csv") else "binary"
    if format == "csv":
        return _load_csv(path)
    if format == "binary":
        return _load_binary(path)
    raise ValueError(f"unknown feature format {format!r}")


def save_features(ds, path, format=None):
    path = os.fspath(path)
    if format is None:
        format = "csv" if path.lower().endswith(".csv") else "binary"
    if format == "csv":
        _save_csv(ds, path)
    elif format == "binary":
        _save_binary(ds, path)
    else:
        raise ValueError(f"unknown feature format {format!r}")


def _load_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        m = CSV_HEADER.match(header.strip())
        if m is None:
            raise HeaderError(f"malformed header {header.strip()!r}", "line 1")
        n, d, c = (int(g) for g in m.groups())
        if n == 0 or d == 0 or c == 0:
            raise HeaderError("header counts must be positive", "line 1")
        samples = np.empty((n, d), dtype=np.float64)
        labels = np.empty(n, dtype=np.int64)
        row = 0
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            if row >= n:
                raise RowLengthError(f"more than the declared {n} rows", f"line {lineno}")
            parts = line.split(",")
            if len(parts) != d + 1:
                raise RowLengthError(
                    f"expected {d + 1} fields, found {len(parts)}", f"line {lineno}"
                )
            try:
                label = int(parts[0])
                values = np.array(parts[1:], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"unparseable field ({exc})", f"line {lineno}") from None
            if not 0 <= label < c:
                raise LabelError(f"label {label} outside [0, {c})", f"line {lineno}")
            if not np.all(np.isfinite(values)):
                raise NonFiniteError("non-finite feature value", f"line {lineno}")
            samples[row] = values
            labels[row] = label
            row += 1
    if row != n:
        raise RowLengthError(f"header declares {n} rows, found {row}", "end of file")
    return FeatureDataset(samples, labels, tuple(f"class{i}" for i in range(c)))


def _save_csv(ds, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# fvec v1 n={ds.n} d={ds.d} c={ds.n_classes}\n")
        for label, row in zip(ds.labels, ds.samples):
            fh.write(str(int(label)))
            fh.write(",")
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _record_dtype(d):
    return np.dtype([("label", "<u4"), ("x", "<f4", (d,))])


def _load_binary(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:5] != BINARY_MAGIC:
        raise HeaderError("bad magic bytes", "offset 0")
    if len(blob) < 17:
        raise HeaderError("truncated header", "offset 5")
    n, d, c = struct.unpack_from("<III", blob, 5)
    if n == 0 or d == 0 or c == 0:
        raise HeaderError("header counts must be positive", "offset 5")
    rec = _record_dtype(d)
    expected = 17 + n * rec.itemsize
    if len(blob) != expected:
        # Locate the first incomplete record for the diagnostic.
        complete = (len(blob) - 17) // rec.itemsize
        raise RowLengthError(
            f"expected {n} records of {rec.itemsize} bytes ({expected} bytes total), "
            f"file has {len(blob)} bytes",
            f"offset {17 + complete * rec.itemsize}",
        )
    records = np.frombuffer(blob, dtype=rec, count=n, offset=17)
    labels = records["label"].astype(np.int64)
    samples = records["x"].astype(np.float64)
    bad_label = np.flatnonzero(labels >= c)
    if bad_label.size:
        i = int(bad_label[0])
        raise LabelError(f"label {labels[i]} outside [0, {c})", f"offset {17 + i * rec.itemsize}")
    bad_value = np.flatnonzero(~np.all(np.isfinite(samples), axis=1))
    if bad_value.size:
        i = int(bad_value[0])
        raise NonFiniteError("non-finite feature value", f"offset {17 + i * rec.itemsize}")
    return FeatureDataset(samples, labels, tuple(f"class{i}" for i in range(c)))


def _save_binary(ds, path):
    rec = np.empty(ds.n, dtype=_record_dtype(ds.d))
    rec["label"] = ds.labels
    rec["x"] = ds.samples
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<III", ds.n, ds.d, ds.n_classes))
        fh.write(rec.tobytes())


# ---------------------------------------------------------------------------
# folds and balancing


def stratified_kfold(ds, k, seed):
    """Assign every sample to one of ``k`` test folds, class by class.

    Within each class the members are shuffled with ``seed`` and dealt round
    robin, so the first ``N_c mod k`` folds receive one extra sample.
    """
    labels = ds.labels if isinstance(ds, FeatureDataset) else np.asarray(ds, dtype=np.int64)
    if k < 2:
        raise StratificationError(f"k must be at least 2, got {k}")
    counts = np.bincount(labels)
    for c, cnt in enumerate(counts):
        if 0 < cnt < k:
            raise StratificationError(f"class {c} has {cnt} samples, fewer than k={k}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(labels.shape[0], dtype=np.int64)
    for c in range(counts.shape[0]):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            continue
        members = rng.permutation(members)
        assignments[members] = np.arange(members.size) % k
    return FoldPlan(k=int(k), assignments=assignments, seed=int(seed))


def balance_oversample(train, target_per_class=None, jitter_sigma=0.01, seed=0):
    """Oversample minority classes up to ``target_per_class`` rows each.

    New rows are uniform resamples of a class's original rows plus Gaussian
    jitter whose per-feature standard deviation is ``jitter_sigma`` times that
    feature's standard deviation over ``train``. Originals are kept, unmodified
    and in order, followed by the added rows grouped by class.
    """
    counts = train.class_counts()
    if target_per_class is None:
        target_per_class = int(counts.max())
    if target_per_class < counts.max():
        raise ValueError(
            f"target_per_class={target_per_class} is below the majority count {counts.max()}"
        )
    if jitter_sigma < 0:
        raise ValueError("jitter_sigma must be non-negative")
    rng = np.random.default_rng(seed)
    scale = jitter_sigma * train.samples.std(axis=0)
    extra_x, extra_y = [], []
    for c in range(train.n_classes):
        deficit = target_per_class - int(counts[c])
        if deficit == 0:
            continue
        members = np.flatnonzero(train.labels == c)
        if members.size == 0:
            raise ValueError(f"class {c} has no samples to resample")
        picks = members[rng.integers(0, members.size, size=deficit)]
        rows = train.samples[picks]
        if jitter_sigma > 0:
            rows = rows + rng.standard_normal(rows.shape) * scale
        extra_x.append(rows)
        extra_y.append(np.full(deficit, c, dtype=np.int64))
    if not extra_x:
        return train
    samples = np.vstack([train.samples] + extra_x)
    labels = np.concatenate([train.labels] + extra_y)
    return FeatureDataset(samples, labels, train.class_names)

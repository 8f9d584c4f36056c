"""Dataset ingestion: libsvm and CSV parsing, label normalization, permutation.

Features are stored dense; labels are normalized to -1/+1 at parse time.
Observed label sets map as: {-1,+1} kept, {1,2} -> (1:+1, 2:-1),
{0,1} -> (0:-1, 1:+1); anything else is rejected. Files ending in ``.gz``
are decompressed transparently.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .validation import as_binary_labels, as_feature_matrix, check_paired

__all__ = ["LabeledExample", "Dataset", "DataFormatError", "parse_libsvm",
           "parse_csv", "load_dataset", "dump_libsvm", "train_test_split",
           "minmax_scale"]


class DataFormatError(ValueError):
    """Malformed or unsupported input data."""


@dataclass(frozen=True)
class LabeledExample:
    features: np.ndarray
    label: int
    source_index: int


class Dataset:
    """Immutable dense feature matrix plus -1/+1 labels."""

    def __init__(self, features, labels, name: str = "",
                 source_index: np.ndarray | None = None):
        X = as_feature_matrix(features)
        y = as_binary_labels(labels)
        check_paired(X, y)
        self.features = X
        self.labels = y
        self.name = name
        if source_index is None:
            source_index = np.arange(X.shape[0], dtype=np.int64)
        self.source_index = np.asarray(source_index, dtype=np.int64)
        if self.source_index.shape[0] != X.shape[0]:
            raise ValueError("source_index length mismatch")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def __getitem__(self, i: int) -> LabeledExample:
        return LabeledExample(self.features[i], int(self.labels[i]),
                              int(self.source_index[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def permute(self, seed: int) -> "Dataset":
        """Deterministic seeded shuffle; the example multiset is unchanged."""
        order = np.random.default_rng(seed).permutation(len(self))
        return Dataset(self.features[order], self.labels[order], self.name,
                       self.source_index[order])

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.name,
                       self.source_index[idx])


def _map_labels(raw: np.ndarray) -> np.ndarray:
    values = set(np.unique(raw).tolist())
    if values <= {-1.0, 1.0}:
        return raw.astype(np.int64)
    if values <= {1.0, 2.0}:
        return np.where(raw == 1.0, 1, -1).astype(np.int64)
    if values <= {0.0, 1.0}:
        return np.where(raw == 1.0, 1, -1).astype(np.int64)
    raise DataFormatError(
        f"cannot map label set {sorted(values)} onto -1/+1")


def parse_libsvm(text, name: str = "") -> Dataset:
    """Parse 'label idx:val ...' lines (1-based ascending indices) densely.

    Examples are zero-padded to the maximum index seen anywhere in the file.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = [ln.decode("utf-8") if isinstance(ln, bytes) else ln
                 for ln in text]
    raw_labels = []
    rows = []
    max_index = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            raw_labels.append(float(parts[0]))
        except ValueError:
            raise DataFormatError(f"line {lineno}: bad label {parts[0]!r}")
        pairs = []
        last = 0
        for token in parts[1:]:
            try:
                idx_text, val_text = token.split(":", 1)
                idx = int(idx_text)
                val = float(val_text)
            except ValueError:
                raise DataFormatError(f"line {lineno}: bad feature token {token!r}")
            if idx < 1:
                raise DataFormatError(f"line {lineno}: index {idx} must be >= 1")
            if idx <= last:
                raise DataFormatError(
                    f"line {lineno}: indices must be ascending, got {idx} after {last}")
            last = idx
            pairs.append((idx, val))
        max_index = max(max_index, last)
        rows.append(pairs)
    if not rows:
        raise DataFormatError("no examples found")
    X = np.zeros((len(rows), max_index))
    for i, pairs in enumerate(rows):
        for idx, val in pairs:
            X[i, idx - 1] = val
    labels = _map_labels(np.asarray(raw_labels))
    return Dataset(X, labels, name=name)


def parse_csv(text, label_column: int, header: bool = False,
              name: str = "") -> Dataset:
    """Parse numeric CSV rows; the label column is split off and mapped."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if header:
        lines = lines[1:]
    if not lines:
        raise DataFormatError("no examples found")
    raw_labels = []
    rows = []
    width = None
    for rowno, line in enumerate(lines, start=1):
        cells = line.split(",")
        if width is None:
            width = len(cells)
            if not 0 <= label_column < width:
                raise DataFormatError(
                    f"label column {label_column} out of range for {width} columns")
        elif len(cells) != width:
            raise DataFormatError(
                f"row {rowno}: ragged row with {len(cells)} cells, expected {width}")
        try:
            values = [float(c) for c in cells]
        except ValueError:
            bad = next(c for c in cells if not _is_number(c))
            raise DataFormatError(f"row {rowno}: non-numeric cell {bad.strip()!r}")
        raw_labels.append(values[label_column])
        rows.append(values[:label_column] + values[label_column + 1:])
    labels = _map_labels(np.asarray(raw_labels))
    return Dataset(np.asarray(rows), labels, name=name)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _read_text(path) -> str:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            return fh.read()
    return path.read_text(encoding="utf-8")


def load_dataset(path, fmt: str = "libsvm", label_column: int = 0,
                 header: bool = False) -> Dataset:
    """Load a dataset file (optionally gzip-compressed) in either format."""
    text = _read_text(path)
    name = Path(path).name
    for suffix in (".gz", ".txt", ".csv", ".libsvm"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    if fmt == "libsvm":
        return parse_libsvm(text, name=name)
    if fmt == "csv":
        return parse_csv(text, label_column=label_column, header=header, name=name)
    raise DataFormatError(f"unknown format {fmt!r}")


def dump_libsvm(ds: Dataset) -> str:
    """Serialize densely-stored examples back to sparse libsvm text.

    Zeros are skipped; if the last column is zero everywhere, one explicit
    '<d>:0' entry is emitted on the first line so parsing recovers the
    original dimension.
    """
    out = io.StringIO()
    d = ds.dimension
    saw_last = False
    lines = []
    for i in range(len(ds)):
        x = ds.features[i]
        nz = np.nonzero(x)[0]
        if nz.size and nz[-1] == d - 1:
            saw_last = True
        tokens = [f"{int(ds.labels[i]):+d}"]
        tokens += [f"{j + 1}:{x[j]:.17g}" for j in nz]
        lines.append(" ".join(tokens))
    if not saw_last and lines:
        lines[0] += f" {d}:0"
    out.write("\n".join(lines))
    out.write("\n")
    return out.getvalue()


def train_test_split(ds: Dataset, test_fraction: float, seed: int
                     ) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split; test gets round(n * test_fraction) examples."""
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must lie in (0,1), got {test_fraction}")
    n = len(ds)
    order = np.random.default_rng(seed).permutation(n)
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n_test >= n:
        raise ValueError("split leaves an empty side")
    return ds.subset(order[n_test:]), ds.subset(order[:n_test])


def minmax_scale(ds: Dataset) -> Dataset:
    """Scale each feature to [0, 1]; constant features map to 0."""
    lo = ds.features.min(axis=0)
    hi = ds.features.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    X = (ds.features - lo) / span
    return Dataset(X, ds.labels, ds.name, ds.source_index)

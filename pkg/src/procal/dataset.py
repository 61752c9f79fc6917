"""Numeric datasets: CSV in/out, z-score normalisation, sufficient statistics.

A :class:`Dataset` keeps every non-class attribute in one read-only
``float64`` matrix of shape ``(m, n)`` and the class column, if any, as a
separate array of string tokens.  The class column never enters a numeric
transform; it is re-attached at its original position on output.
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptyDataset, MalformedRow, NonNumericValue
from .seeding import derive_rng

# std at or below this (relative to max(1, |mean|)) counts as a constant column
ZERO_STD_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Record:
    values: np.ndarray
    label: str | None = None

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered numeric records plus an optional label column.

    ``schema`` names every column of the source table, class column included;
    ``class_column`` is its (non-negative) position in ``schema``.
    """

    values: np.ndarray
    schema: tuple[str, ...]
    labels: np.ndarray | None = None
    class_column: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        n_cols = values.shape[1] + (self.class_column is not None)
        if len(self.schema) != n_cols:
            raise ValueError(f"schema has {len(self.schema)} names for {n_cols} columns")
        if (self.labels is None) != (self.class_column is None):
            raise ValueError("labels and class_column must be given together")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite attribute value")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "schema", tuple(self.schema))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=object)
            if labels.shape != (values.shape[0],):
                raise ValueError("one label per record required")
            object.__setattr__(self, "labels", _frozen(labels))

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def attribute_names(self) -> list[str]:
        return [s for i, s in enumerate(self.schema) if i != self.class_column]

    def __len__(self) -> int:
        return self.m

    def record(self, i: int) -> Record:
        label = None if self.labels is None else self.labels[i]
        return Record(self.values[i], label)

    def __iter__(self) -> Iterator[Record]:
        for i in range(self.m):
            yield self.record(i)

    def with_values(self, values, labels=None) -> "Dataset":
        """Same schema, new numeric content (and optionally new labels)."""
        if labels is None:
            labels = self.labels
        return Dataset(values, self.schema, labels, self.class_column)

    def take(self, index) -> "Dataset":
        index = np.asarray(index, dtype=np.intp)
        labels = None if self.labels is None else self.labels[index]
        return Dataset(self.values[index], self.schema, labels, self.class_column)


@dataclass(frozen=True, eq=False)
class NormalizationParams:
    means: np.ndarray
    stds: np.ndarray
    zero_std: np.ndarray = field(default=None)

    def __post_init__(self):
        stds = np.asarray(self.stds, dtype=np.float64)
        if np.any(stds < 0):
            raise ValueError("negative standard deviation")
        zero = stds == 0 if self.zero_std is None else np.asarray(self.zero_std, dtype=bool)
        object.__setattr__(self, "means", _frozen(np.asarray(self.means, dtype=np.float64)))
        object.__setattr__(self, "stds", _frozen(stds))
        object.__setattr__(self, "zero_std", _frozen(zero))

    @property
    def scale(self) -> np.ndarray:
        """Divisor per attribute; 1 where the column is constant."""
        return np.where(self.zero_std, 1.0, self.stds)

    def apply(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=np.float64) - self.means) / self.scale
        z[:, self.zero_std] = 0.0
        return z

    def invert(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) * self.scale + self.means


def fit_zscore(x: np.ndarray) -> NormalizationParams:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] == 0:
        raise EmptyDataset("cannot normalise an empty dataset")
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    zero = stds <= ZERO_STD_RTOL * np.maximum(1.0, np.abs(means))
    stds = np.where(zero, 0.0, stds)
    return NormalizationParams(means, stds, zero)


def zscore(x: np.ndarray) -> np.ndarray:
    """Column-wise z-score of a bare matrix (constant columns map to 0)."""
    return fit_zscore(x).apply(x)


def zscore_normalize(d: Dataset) -> tuple[Dataset, NormalizationParams]:
    if d.m == 0:
        raise EmptyDataset("cannot normalise an empty dataset")
    params = fit_zscore(d.values)
    return d.with_values(params.apply(d.values)), params


def column_stats(d: Dataset | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-attribute sums and the matrix of per-pair product sums.

    Rows are put into lexicographic order before summation, so the result is
    bit-identical for any permutation of the input records.
    """
    x = d.values if isinstance(d, Dataset) else np.asarray(d, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("column statistics of an empty dataset")
    x = x[np.lexsort(x.T[::-1])]
    x = np.ascontiguousarray(x)
    sums = x.sum(axis=0)
    prods = x.T @ x
    return sums, (prods + prods.T) / 2.0


# -- CSV -----------------------------------------------------------------------

def _parse_float(token: str, row: int, col: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise NonNumericValue(row, col, token) from None
    if not math.isfinite(v):
        raise NonNumericValue(row, col, token)
    return v


def parse_rows(rows, class_column: int | None, first_row: int = 1):
    """Split raw CSV rows into a value matrix and a label list.

    ``first_row`` is the 1-based line number of ``rows[0]`` used in error
    messages.
    """
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyDataset("no data rows")
    width = len(rows[0])
    if class_column is not None:
        if class_column < 0:
            class_column += width
        if not 0 <= class_column < width:
            raise MalformedRow(first_row, f"a class column at {class_column}", width)
    values = np.empty((len(rows), width - (class_column is not None)), dtype=np.float64)
    labels = [] if class_column is not None else None
    for i, r in enumerate(rows):
        lineno = first_row + i
        if len(r) != width:
            raise MalformedRow(lineno, width, len(r))
        j = 0
        for c, tok in enumerate(r):
            if c == class_column:
                labels.append(tok.strip())
                continue
            values[i, j] = _parse_float(tok.strip(), lineno, c)
            j += 1
    return values, labels, class_column, width


def load_csv(path: str | os.PathLike, has_header: bool = True,
             class_column: int | None = None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = None
    if has_header:
        if not rows:
            raise EmptyDataset(f"{path}: empty file")
        header, rows = rows[0], rows[1:]
    values, labels, class_column, width = parse_rows(
        rows, class_column, first_row=2 if has_header else 1)
    if header is None:
        header = [f"a{i}" for i in range(width)]
    elif len(header) != width:
        raise MalformedRow(1, width, len(header))
    return Dataset(values, tuple(h.strip() for h in header),
                   None if labels is None else np.array(labels, dtype=object),
                   class_column)


def format_value(v: float) -> str:
    return format(float(v), ".17g")


def csv_rows(d: Dataset, values: np.ndarray | None = None,
             labels: Sequence | None = None) -> Iterator[list[str]]:
    values = d.values if values is None else values
    labels = d.labels if labels is None else labels
    c = d.class_column
    for i in range(values.shape[0]):
        row = [format_value(v) for v in values[i]]
        if c is not None:
            row.insert(c, str(labels[i]))
        yield row


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a sibling temp file and rename so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_csv_text(d: Dataset, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(d.schema)
    w.writerows(csv_rows(d))
    return buf.getvalue()


def emit_csv(d: Dataset, path: str | os.PathLike, header: bool = True) -> None:
    atomic_write_text(path, to_csv_text(d, header))


# -- synthetic data --------------------------------------------------------------

def make_blobs(m: int, n: int, classes: int = 5, seed: int = 0,
               spread: float = 1.0, center_box: float = 10.0) -> Dataset:
    """Isotropic Gaussian blobs, one per class, with labels ``c0``, ``c1``, ...

    Class sizes differ by at most one; rows are in random order.
    """
    rng = derive_rng(seed, "blobs")
    centers = rng.uniform(-center_box, center_box, size=(classes, n))
    y = np.arange(m) % classes
    rng.shuffle(y)
    x = centers[y] + rng.normal(scale=spread, size=(m, n))
    schema = tuple(f"x{i}" for i in range(n)) + ("class",)
    labels = np.array([f"c{c}" for c in y], dtype=object)
    return Dataset(x, schema, labels, n)

"""Buffered perturbation of record streams.

A :class:`StreamSession` pulls ``l`` records from its source into a buffer,
perturbs the buffer on its own (grouping never crosses chunk boundaries),
and holds perturbed chunks until ``t`` of them exist.  It then releases the
merged, row-shuffled block of ``t*l`` records.  When the source runs dry the
held chunks are flushed as a final, smaller block.

The session pulls; a fast source simply waits, and at most ``t*l + l`` rows
are held at any time.
"""
from __future__ import annotations

import csv
import statistics
import sys
import time
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

import numpy as np

from .dataset import Record, make_blobs, parse_rows
from .errors import DimensionMismatch, InvalidStreamConfig, MalformedRow, SourceFailure
from .grouping import BY_CLUSTER_COUNT, GroupingConfig
from .perturb import PerturbConfig, perturb_block, perturb_static
from .seeding import derive_rng, derive_seed
from .spectral import RotationMatrix, random_orthogonal


@dataclass(frozen=True)
class StreamConfig:
    buffer_size: int
    release_threshold: int
    grouping: GroupingConfig
    seed: int = 0
    fallback_min_group_size: int = 2

    def check(self) -> None:
        l, t = self.buffer_size, self.release_threshold
        if l < 1 or t < 1:
            raise InvalidStreamConfig(f"buffer size l={l} and threshold t={t} must be positive")
        if self.grouping.mode == BY_CLUSTER_COUNT:
            if l < 2 * self.grouping.size:
                raise InvalidStreamConfig(
                    f"buffer size l={l} is below 2*k={2 * self.grouping.size}")
        elif l < 2 * self.grouping.size:
            warnings.warn(f"buffer size l={l} holds fewer than two groups of k'={self.grouping.size}",
                          stacklevel=3)

    @property
    def perturb_config(self) -> PerturbConfig:
        return PerturbConfig(self.grouping, self.seed, self.fallback_min_group_size)


@dataclass(frozen=True, eq=False)
class ReleaseBlock:
    values: np.ndarray
    labels: np.ndarray | None
    release_index: int
    flushed: bool = False
    provenance: np.ndarray | None = None

    def __len__(self) -> int:
        return self.values.shape[0]


def _coerce(rec) -> Record:
    if isinstance(rec, Record):
        return rec
    if isinstance(rec, tuple) and len(rec) == 2 and not np.isscalar(rec[0]):
        return Record(np.asarray(rec[0], dtype=np.float64), rec[1])
    return Record(np.asarray(rec, dtype=np.float64), None)


class StreamSession:
    """Iterate over it, or call :meth:`next_release` until it returns ``None``."""

    def __init__(self, source: Iterable, cfg: StreamConfig, keep_provenance: bool = False):
        cfg.check()
        self.cfg = cfg
        self.keep_provenance = keep_provenance
        self._source = iter(source)
        self._pending: list[tuple[np.ndarray, list, np.ndarray]] = []
        self._last_rotation: RotationMatrix | None = None
        self._n: int | None = None
        self._ended = False
        self.chunk_index = 0
        self.release_index = 0
        self.rows_consumed = 0
        self.peak_buffered_rows = 0

    @property
    def rep(self) -> int:
        """Perturbed chunks held since the last release."""
        return len(self._pending)

    def _held(self) -> int:
        return sum(len(c[1]) for c in self._pending)

    def _fill(self) -> list[Record]:
        buf: list[Record] = []
        l = self.cfg.buffer_size
        while len(buf) < l:
            try:
                raw = next(self._source)
            except StopIteration:
                self._ended = True
                break
            except Exception as exc:
                raise SourceFailure(self.chunk_index, exc) from exc
            rec = _coerce(raw)
            if self._n is None:
                self._n = len(rec.values)
            elif len(rec.values) != self._n:
                raise DimensionMismatch(
                    f"record {self.rows_consumed + len(buf)} has {len(rec.values)} attributes, expected {self._n}")
            buf.append(rec)
            self.peak_buffered_rows = max(self.peak_buffered_rows, self._held() + len(buf))
        return buf

    def _perturb_chunk(self, buf: list[Record]) -> None:
        x = np.array([r.values for r in buf], dtype=np.float64)
        seed = derive_seed(self.cfg.seed, "chunk", self.chunk_index)
        if len(buf) == 1:
            if self._last_rotation is None:
                n = x.shape[1]
                q = random_orthogonal(n, derive_rng(seed, "orphan-rotation")) if n > 1 else -np.eye(1)
                self._last_rotation = RotationMatrix(q, np.arange(n))
            y = x @ self._last_rotation.entries.T
        else:
            block = perturb_block(x, self.cfg.perturb_config, seed, self._last_rotation)
            y = block.values
            self._last_rotation = block.last_rotation
        origin = np.arange(self.rows_consumed, self.rows_consumed + len(buf))
        self._pending.append((y, [r.label for r in buf], origin))
        self.rows_consumed += len(buf)
        self.chunk_index += 1

    def _release(self, flushed: bool) -> ReleaseBlock:
        values = np.concatenate([c[0] for c in self._pending])
        labels = [lab for c in self._pending for lab in c[1]]
        origin = np.concatenate([c[2] for c in self._pending])
        self._pending = []
        perm = derive_rng(self.cfg.seed, "release-shuffle", self.release_index).permutation(len(labels))
        lab_arr = None
        if any(lab is not None for lab in labels):
            lab_arr = np.array(labels, dtype=object)[perm]
        block = ReleaseBlock(values[perm], lab_arr, self.release_index, flushed,
                             origin[perm] if self.keep_provenance else None)
        self.release_index += 1
        return block

    def next_release(self) -> ReleaseBlock | None:
        """Next released block, or ``None`` once the stream is exhausted."""
        while not self._ended:
            buf = self._fill()
            if buf:
                self._perturb_chunk(buf)
            if len(self._pending) == self.cfg.release_threshold:
                return self._release(flushed=False)
        if self._pending:
            return self._release(flushed=True)
        return None

    def __iter__(self) -> Iterator[ReleaseBlock]:
        while True:
            block = self.next_release()
            if block is None:
                return
            yield block


def open_stream(source: Iterable, cfg: StreamConfig, keep_provenance: bool = False) -> StreamSession:
    return StreamSession(source, cfg, keep_provenance)


# -- record sources ------------------------------------------------------------

def _row_records(rows: Iterable[list[str]], class_column: int | None, first_row: int) -> Iterator[Record]:
    width = None
    for i, row in enumerate(rows):
        if not row or not any(c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
        if len(row) != width:
            raise MalformedRow(first_row + i, width, len(row))
        values, labels, _, _ = parse_rows([row], class_column, first_row + i)
        yield Record(values[0], None if labels is None else labels[0])


def csv_source(path, has_header: bool = True, class_column: int | None = None,
               rate: float | None = None) -> Iterator[Record]:
    """Replay a CSV file as a stream, optionally paced at ``rate`` rows/second."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if has_header:
            next(reader, None)
        start = time.perf_counter()
        for k, rec in enumerate(_row_records(reader, class_column, 2 if has_header else 1)):
            if rate:
                delay = start + k / rate - time.perf_counter()
                if delay > 0:
                    time.sleep(delay)
            yield rec


def line_source(stream: TextIO | None = None, class_column: int | None = None,
                has_header: bool = False) -> Iterator[Record]:
    """Comma-delimited records, one per line (standard input by default)."""
    stream = sys.stdin if stream is None else stream
    reader = csv.reader(stream)
    if has_header:
        next(reader, None)
    yield from _row_records(reader, class_column, 2 if has_header else 1)


# -- throughput --------------------------------------------------------------------

@dataclass(frozen=True)
class Throughput:
    m: int
    n: int
    seconds: tuple[float, ...]

    @property
    def median_seconds(self) -> float:
        return statistics.median(self.seconds)

    @property
    def rows_per_second(self) -> float:
        return self.m / self.median_seconds


def throughput_probe(cfg: StreamConfig | PerturbConfig, m: int, n: int,
                     repeats: int = 3, data_seed: int = 0, classes: int = 10) -> Throughput:
    """Median wall time to perturb ``m`` synthetic rows of ``n`` attributes.

    A :class:`StreamConfig` runs the buffered path, a :class:`PerturbConfig`
    the static one.  The data are ``classes`` Gaussian blobs.
    """
    d = make_blobs(m, n, classes=classes, seed=data_seed)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        if isinstance(cfg, StreamConfig):
            rows = ((d.values[i], None) for i in range(m))
            for _block in open_stream(rows, cfg):
                pass
        else:
            perturb_static(d, cfg)
        times.append(time.perf_counter() - t0)
    return Throughput(m, n, tuple(times))

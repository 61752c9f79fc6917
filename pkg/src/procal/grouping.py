"""Partitioning a dataset into homogeneous groups.

Two modes:

* ``by_group_size`` -- repeatedly draw a random pivot from the records not yet
  grouped and take its ``k'-1`` nearest remaining records (Euclidean distance,
  lowest record index wins ties).  Every group has ``k'`` members except the
  last, which holds the remainder.
* ``by_cluster_count`` -- Lloyd's k-means with k-means++ seeding.  Clusters that
  end up empty are dropped, so there may be fewer than ``k`` groups.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .dataset import Dataset, Record
from .errors import ArityMismatch, EmptyDataset, InvalidClusterCount, InvalidGroupSize
from .seeding import derive_rng

BY_GROUP_SIZE = "by_group_size"
BY_CLUSTER_COUNT = "by_cluster_count"
DEFAULT_MAX_KMEANS_ITER = 100


@dataclass(frozen=True)
class GroupingConfig:
    """``size`` is k' in ``by_group_size`` mode and k in ``by_cluster_count`` mode."""

    mode: str
    size: int
    seed: int = 0
    max_kmeans_iterations: int = DEFAULT_MAX_KMEANS_ITER

    def __post_init__(self):
        if self.mode == BY_GROUP_SIZE:
            if self.size < 2:
                raise InvalidGroupSize(f"group size k'={self.size} must be at least 2")
        elif self.mode == BY_CLUSTER_COUNT:
            if self.size < 1:
                raise InvalidClusterCount(f"cluster count k={self.size} must be at least 1")
            if self.max_kmeans_iterations < 1:
                raise ValueError("max_kmeans_iterations must be positive")
        else:
            raise ValueError(f"unknown grouping mode {self.mode!r}")

    @classmethod
    def by_size(cls, kprime: int, seed: int = 0) -> "GroupingConfig":
        return cls(BY_GROUP_SIZE, kprime, seed)

    @classmethod
    def by_clusters(cls, k: int, seed: int = 0,
                    max_iter: int = DEFAULT_MAX_KMEANS_ITER) -> "GroupingConfig":
        return cls(BY_CLUSTER_COUNT, k, seed, max_iter)

    def with_seed(self, seed: int) -> "GroupingConfig":
        return GroupingConfig(self.mode, self.size, seed, self.max_kmeans_iterations)


@dataclass(frozen=True, eq=False)
class Grouping:
    """Record indices per group, in group-processing order."""

    groups: list[np.ndarray]
    m: int
    wcss_history: list[float] = field(default_factory=list)

    @property
    def assignment(self) -> np.ndarray:
        out = np.empty(self.m, dtype=np.intp)
        for g, members in enumerate(self.groups):
            out[members] = g
        return out

    @property
    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def __len__(self) -> int:
        return len(self.groups)


def _as_matrix(d) -> np.ndarray:
    x = d.values if isinstance(d, Dataset) else np.asarray(d, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("cannot group an empty dataset")
    return np.ascontiguousarray(x, dtype=np.float64)


def pairwise_distance(a, b) -> float:
    va = a.values if isinstance(a, Record) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, Record) else np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise ArityMismatch(f"arity {va.shape} vs {vb.shape}")
    return float(math.sqrt(float(np.sum((va - vb) ** 2))))


def group_by_size(d: Dataset | np.ndarray, kprime: int, seed: int = 0) -> Grouping:
    if kprime < 2:
        raise InvalidGroupSize(f"group size k'={kprime} must be at least 2")
    x = _as_matrix(d)
    m = x.shape[0]
    u = derive_rng(seed, "group-pivots").random(math.ceil(m / kprime))
    order, starts = _backend.kernels.group_by_size(x, int(kprime), u)
    bounds = list(starts) + [m]
    groups = [np.asarray(order[bounds[i]:bounds[i + 1]]) for i in range(len(starts))]
    return Grouping(groups, m)


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: each new centre is the best of a few D^2-weighted draws."""
    m = x.shape[0]
    trials = 2 + int(math.log(k)) if k > 1 else 1
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[int(rng.integers(m))]
    _, d2 = _backend.kernels.assign_nearest(x, centers[:1])
    # candidate distances in one pass via |x|^2 - 2 x.c + |c|^2
    x_sq = np.einsum("ij,ij->i", x, x)
    for c in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            cand = np.searchsorted(np.cumsum(d2), rng.random(trials) * total, side="right")
            cand = np.minimum(cand, m - 1)
        else:
            cand = rng.integers(m, size=trials)
        dn = x_sq[:, None] - 2.0 * (x @ x[cand].T) + x_sq[cand][None, :]
        np.maximum(dn, 0.0, out=dn)
        pots = np.minimum(d2[:, None], dn).sum(axis=0)
        best = int(np.argmin(pots))
        centers[c] = x[cand[best]]
        d2 = np.minimum(d2, dn[:, best])
    return centers


def group_by_kmeans(d: Dataset | np.ndarray, k: int, seed: int = 0,
                    max_iter: int = DEFAULT_MAX_KMEANS_ITER) -> Grouping:
    x = _as_matrix(d)
    m, n = x.shape
    if not 1 <= k <= m:
        raise InvalidClusterCount(f"cluster count k={k} must lie in [1, {m}]")
    rng = derive_rng(seed, "kmeans-init")
    centers = _kmeans_pp(x, k, rng)
    labels = None
    history = []
    for _ in range(max_iter):
        new_labels, d2 = _backend.kernels.assign_nearest(x, centers)
        history.append(float(d2.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        counts = np.bincount(labels, minlength=k)
        for j in range(n):
            sums = np.bincount(labels, weights=x[:, j], minlength=k)
            nz = counts > 0
            centers[nz, j] = sums[nz] / counts[nz]
    else:
        labels, d2 = _backend.kernels.assign_nearest(x, centers)
        history.append(float(d2.sum()))
    groups = [np.flatnonzero(labels == c) for c in range(k)]
    return Grouping([g for g in groups if len(g)], m, history)


def make_grouping(d: Dataset | np.ndarray, cfg: GroupingConfig) -> Grouping:
    if cfg.mode == BY_GROUP_SIZE:
        return group_by_size(d, cfg.size, cfg.seed)
    return group_by_kmeans(d, cfg.size, cfg.seed, cfg.max_kmeans_iterations)

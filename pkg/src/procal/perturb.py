"""Rotation-based condensation perturbation of a static dataset.

Each group is multiplied by its own column-shuffled covariance eigenbasis.
Groups that cannot yield a useful rotation (a single record, or identical
records) borrow the most recent matrix produced by a larger group.  The
merged result is row-shuffled before release.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, zscore
from .errors import EmptyDataset, ProvenanceMissing
from .grouping import GroupingConfig, Grouping, make_grouping
from .seeding import derive_rng, derive_seed
from .spectral import (RotationMatrix, eigendecompose, group_covariance,
                       random_orthogonal, shuffle_columns)


@dataclass(frozen=True)
class PerturbConfig:
    grouping: GroupingConfig
    seed: int = 0
    fallback_min_group_size: int = 2

    def __post_init__(self):
        if self.fallback_min_group_size < 2:
            raise ValueError("fallback_min_group_size must be at least 2")

    @classmethod
    def create(cls, mode: str, size: int, seed: int = 0, **kw) -> "PerturbConfig":
        """Config whose grouping seed is derived from the single run seed."""
        max_iter = kw.pop("max_kmeans_iterations", None)
        gkw = {} if max_iter is None else {"max_kmeans_iterations": max_iter}
        grouping = GroupingConfig(mode, size, derive_seed(seed, "grouping"), **gkw)
        return cls(grouping, seed, **kw)


@dataclass(frozen=True, eq=False)
class PerturbedDataset:
    """Perturbed records with their original labels.

    ``provenance[i]`` is the input row that output row ``i`` came from; it is
    only kept when asked for, since it undoes the release shuffle.
    """

    data: Dataset
    provenance: np.ndarray | None = None
    grouping: Grouping | None = None


@dataclass(frozen=True, eq=False)
class BlockResult:
    values: np.ndarray
    grouping: Grouping
    last_rotation: RotationMatrix | None
    rotations: list


def _non_identity_rotation(x: np.ndarray, rng: np.random.Generator) -> RotationMatrix:
    e = eigendecompose(group_covariance(x))
    n = x.shape[1]
    if n == 1:
        # the only orthogonal 1x1 maps are +1 and -1
        return RotationMatrix(np.array([[-1.0]]), np.zeros(1, dtype=np.intp))
    while True:
        r = shuffle_columns(e, rng)
        if not r.is_identity():
            return r


def rotate_groups(x: np.ndarray, grouping: Grouping, seed: int,
                  fallback: RotationMatrix | None = None,
                  min_group_size: int = 2) -> BlockResult:
    """Rotate every group of ``x`` in place order; no row shuffle.

    ``fallback`` seeds the borrowed-matrix chain (the stream engine passes the
    previous chunk's last matrix).
    """
    y = np.empty_like(x)
    last = fallback
    deferred = []
    used = [None] * len(grouping.groups)
    for gi, members in enumerate(grouping.groups):
        part = x[members]
        if len(members) >= min_group_size and not np.all(part == part[0]):
            r = _non_identity_rotation(part, derive_rng(seed, "group-rotation", gi))
            y[members] = part @ r.entries.T
            used[gi] = r
            last = r
        elif last is not None:
            y[members] = part @ last.entries.T
            used[gi] = last
        else:
            deferred.append(gi)
    if deferred:
        if last is None:
            n = x.shape[1]
            q = random_orthogonal(n, derive_rng(seed, "orphan-rotation")) if n > 1 else -np.eye(1)
            last = RotationMatrix(q, np.arange(n))
        for gi in deferred:
            members = grouping.groups[gi]
            y[members] = x[members] @ last.entries.T
            used[gi] = last
    return BlockResult(y, grouping, last, used)


def perturb_block(x: np.ndarray, cfg: PerturbConfig, seed: int,
                  fallback: RotationMatrix | None = None) -> BlockResult:
    grouping_cfg = cfg.grouping.with_seed(derive_seed(seed, "grouping"))
    if grouping_cfg.mode == "by_cluster_count" and grouping_cfg.size > x.shape[0]:
        grouping_cfg = GroupingConfig(grouping_cfg.mode, x.shape[0], grouping_cfg.seed,
                                      grouping_cfg.max_kmeans_iterations)
    grouping = make_grouping(x, grouping_cfg)
    return rotate_groups(x, grouping, seed, fallback, cfg.fallback_min_group_size)


def perturb_static(d: Dataset, cfg: PerturbConfig,
                   keep_provenance: bool = False) -> PerturbedDataset:
    if d.m == 0:
        raise EmptyDataset("cannot perturb an empty dataset")
    grouping = make_grouping(d.values, cfg.grouping)
    block = rotate_groups(np.ascontiguousarray(d.values), grouping, cfg.seed,
                          None, cfg.fallback_min_group_size)
    perm = derive_rng(cfg.seed, "release-shuffle").permutation(d.m)
    labels = None if d.labels is None else d.labels[perm]
    out = d.with_values(block.values[perm], labels)
    if keep_provenance:
        return PerturbedDataset(out, perm, grouping)
    return PerturbedDataset(out)


@dataclass(frozen=True, eq=False)
class Displacement:
    per_attribute: np.ndarray

    @property
    def min(self) -> float:
        return float(self.per_attribute.min())

    @property
    def avg(self) -> float:
        return float(self.per_attribute.mean())


def aligned_originals(d: Dataset, p: PerturbedDataset) -> np.ndarray:
    if p.provenance is None:
        raise ProvenanceMissing("perturbed data carries no provenance; rerun in test mode")
    return d.values[p.provenance]


def normalized_difference_std(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-column std of z(a) - z(b), each side z-scored on its own."""
    return (zscore(a) - zscore(b)).std(axis=0)


def perturbation_displacement(d: Dataset, p: PerturbedDataset) -> Displacement:
    return Displacement(normalized_difference_std(aligned_originals(d, p), p.data.values))

"""Comparison methods: data condensation (DC) and random rotation (RP).

DC replaces every fixed-size group with synthetic records drawn uniformly
along the group's eigenvectors, with variance matched to each eigenvalue.

RP applies one orthogonal matrix to the whole z-scored dataset.  Candidates
are the orthonormalised factor of ``I + sigma * G`` with standard normal
``G``; out of ``iterations`` draws the one with the largest minimum
per-attribute displacement wins.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, NormalizationParams, fit_zscore
from .errors import EmptyDataset, InvalidGroupSize
from .grouping import group_by_size
from .perturb import PerturbedDataset, normalized_difference_std
from .seeding import derive_rng, derive_seed
from .spectral import eigendecompose, group_covariance


@dataclass(frozen=True)
class CondensationConfig:
    group_size: int
    seed: int = 0

    def __post_init__(self):
        if self.group_size < 2:
            raise InvalidGroupSize(f"group size k'={self.group_size} must be at least 2")


@dataclass(frozen=True)
class RandomRotationConfig:
    iterations: int = 10
    sigma: float = 0.3
    seed: int = 0
    normalize: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")


def synthesize_group(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """``len(x)`` synthetic records sharing the centroid and covariance of ``x``."""
    centroid = x.mean(axis=0)
    e = eigendecompose(group_covariance(x))
    half_width = np.sqrt(3.0 * np.clip(e.eigenvalues, 0.0, None))
    u = rng.uniform(-1.0, 1.0, size=x.shape) * half_width
    return centroid + u @ e.eigenvectors.T


def perturb_condensation(d: Dataset, cfg: CondensationConfig,
                         keep_provenance: bool = False) -> PerturbedDataset:
    if d.m == 0:
        raise EmptyDataset("cannot condense an empty dataset")
    grouping = group_by_size(d.values, cfg.group_size, derive_seed(cfg.seed, "grouping"))
    y = np.empty_like(d.values)
    labels = None if d.labels is None else d.labels.copy()
    for gi, members in enumerate(grouping.groups):
        rng = derive_rng(cfg.seed, "dc-sample", gi)
        y[members] = synthesize_group(d.values[members], rng)
        if labels is not None:
            labels[members] = d.labels[members][rng.permutation(len(members))]
    perm = derive_rng(cfg.seed, "release-shuffle").permutation(d.m)
    out = d.with_values(y[perm], None if labels is None else labels[perm])
    if keep_provenance:
        return PerturbedDataset(out, perm, grouping)
    return PerturbedDataset(out)


def rotation_candidate(n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    a = np.eye(n) + sigma * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class RotationSearch:
    candidates: list[np.ndarray]
    scores: list[float]
    best: int
    params: NormalizationParams | None

    @property
    def rotation(self) -> np.ndarray:
        return self.candidates[self.best]


def search_rotation(x: np.ndarray, cfg: RandomRotationConfig) -> RotationSearch:
    params = fit_zscore(x) if cfg.normalize else None
    z = params.apply(x) if params is not None else np.asarray(x, dtype=np.float64)
    n = z.shape[1]
    cands, scores = [], []
    best = 0
    for it in range(cfg.iterations):
        q = rotation_candidate(n, cfg.sigma, derive_rng(cfg.seed, "rp-candidate", it))
        score = float(normalized_difference_std(z, z @ q.T).min())
        cands.append(q)
        scores.append(score)
        if score > scores[best]:
            best = it
    return RotationSearch(cands, scores, best, params)


def perturb_random_rotation(d: Dataset, cfg: RandomRotationConfig | None = None,
                            keep_provenance: bool = False) -> PerturbedDataset:
    cfg = cfg or RandomRotationConfig()
    if d.m == 0:
        raise EmptyDataset("cannot perturb an empty dataset")
    search = search_rotation(d.values, cfg)
    q = search.rotation
    if search.params is not None:
        y = search.params.invert(search.params.apply(d.values) @ q.T)
    else:
        y = d.values @ q.T
    out = d.with_values(y)
    if keep_provenance:
        return PerturbedDataset(out, np.arange(d.m))
    return PerturbedDataset(out)

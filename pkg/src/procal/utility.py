"""Classification utility: k-nearest-neighbour accuracy under stratified
k-fold cross-validation, for original and perturbed data."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dataset import Dataset, Record, fit_zscore
from .errors import NoLabels, TooFewRecords
from .seeding import derive_rng

# element budget for one block of query-to-train distances
_BLOCK_ELEMS = 4_000_000


@dataclass(frozen=True)
class CVConfig:
    folds: int = 10
    knn_k: int = 1
    seed: int = 0
    normalize: bool = False

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.knn_k < 1:
            raise ValueError("knn_k must be at least 1")


@dataclass(frozen=True)
class UtilityReport:
    accuracy: float
    fold_accuracies: tuple[float, ...]
    fold_sizes: tuple[int, ...]
    correct: int


def _vote(labels: Sequence[str], dists: np.ndarray) -> str:
    counts: dict[str, int] = defaultdict(int)
    summed: dict[str, float] = defaultdict(float)
    for lab, dist in zip(labels, dists):
        counts[lab] += 1
        summed[lab] += float(dist)
    return min(counts, key=lambda lab: (-counts[lab], summed[lab], lab))


def knn_predict(train_x: np.ndarray, train_y: np.ndarray, query_x: np.ndarray,
                k: int = 1) -> np.ndarray:
    """Majority label of the ``k`` nearest training rows (Euclidean).

    Equal distances go to the lower training index; a split vote goes to the
    label with the smaller summed distance, then the lexicographically lower
    label.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    query_x = np.asarray(query_x, dtype=np.float64)
    if train_x.shape[0] == 0:
        raise TooFewRecords("empty training set")
    k = min(k, train_x.shape[0])
    out = np.empty(query_x.shape[0], dtype=object)
    ntrain = train_x.shape[0]
    # BLAS distances shortlist candidates; exact distances decide among them
    extra = min(ntrain, k + 8)
    t_sq = np.einsum("ij,ij->i", train_x, train_x)
    step = max(1, _BLOCK_ELEMS // max(1, ntrain))
    for lo in range(0, query_x.shape[0], step):
        q = query_x[lo:lo + step]
        approx = t_sq[None, :] - 2.0 * (q @ train_x.T)
        if extra < ntrain:
            cand = np.argpartition(approx, extra - 1, axis=1)[:, :extra]
        else:
            cand = np.broadcast_to(np.arange(ntrain), (len(q), ntrain))
        exact = ((train_x[cand] - q[:, None, :]) ** 2).sum(axis=2)
        for i in range(len(q)):
            sel = np.lexsort((cand[i], exact[i]))[:k]
            idx = cand[i][sel]
            if k == 1:
                out[lo + i] = train_y[idx[0]]
            else:
                out[lo + i] = _vote(train_y[idx], np.sqrt(exact[i][sel]))
    return out


def knn_classify(train: Dataset, query: Record | np.ndarray, k: int = 1) -> str:
    if train.labels is None:
        raise NoLabels("training data has no class column")
    q = query.values if isinstance(query, Record) else np.asarray(query, dtype=np.float64)
    return knn_predict(train.values, train.labels, q[None, :], k)[0]


def stratified_folds(labels: np.ndarray, folds: int, seed: int = 0) -> np.ndarray:
    """Fold number per record: each class is shuffled, then dealt round-robin."""
    rng = derive_rng(seed, "cv-folds")
    classes = sorted(set(labels.tolist()))
    fold = np.empty(len(labels), dtype=np.intp)
    pos = 0
    for c in classes:
        members = np.flatnonzero(labels == c)
        members = members[rng.permutation(len(members))]
        fold[members] = (pos + np.arange(len(members))) % folds
        pos += len(members)
    return fold


def cross_validate(d: Dataset, cfg: CVConfig | None = None) -> UtilityReport:
    cfg = cfg or CVConfig()
    if d.labels is None:
        raise NoLabels("cross-validation needs a class column")
    if d.m < cfg.folds:
        raise TooFewRecords(f"{d.m} records cannot fill {cfg.folds} folds")
    fold = stratified_folds(d.labels, cfg.folds, cfg.seed)
    accs, sizes = [], []
    correct = 0
    for f in range(cfg.folds):
        test = fold == f
        train_x, test_x = d.values[~test], d.values[test]
        if cfg.normalize:
            params = fit_zscore(train_x)
            train_x, test_x = params.apply(train_x), params.apply(test_x)
        pred = knn_predict(train_x, d.labels[~test], test_x, cfg.knn_k)
        hits = int(np.sum(pred == d.labels[test]))
        correct += hits
        sizes.append(int(test.sum()))
        accs.append(hits / sizes[-1] if sizes[-1] else 0.0)
    return UtilityReport(correct / d.m, tuple(accs), tuple(sizes), correct)


@dataclass(frozen=True)
class UtilityTable:
    columns: tuple[str, ...]
    accuracies: tuple[float, ...]
    reports: tuple[UtilityReport, ...]


def utility_comparison(d: Dataset, methods: Sequence[tuple[str, Callable[[Dataset], Dataset]]],
                       cfg: CVConfig | None = None) -> UtilityTable:
    """Accuracy on the original data first, then on each method's output.

    ``methods`` pairs a column name with a function producing the perturbed
    dataset; every run uses the same fold seed.
    """
    cfg = cfg or CVConfig()
    names = ["original"]
    reports = [cross_validate(d, cfg)]
    for name, perturb in methods:
        names.append(name)
        reports.append(cross_validate(perturb(d), cfg))
    return UtilityTable(tuple(names), tuple(r.accuracy for r in reports), tuple(reports))

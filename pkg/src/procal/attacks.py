"""Reconstruction attacks against perturbed data.

All metrics are per-attribute standard deviations of the difference between
z-scored originals and z-scored perturbed (or reconstructed) values, reduced
to their minimum and mean across attributes.  Rows are paired through the
perturbation's provenance map, which only exists in test mode.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, zscore
from .errors import DegenerateSystem, DimensionMismatch, NonConvergenceWarning
from .perturb import PerturbedDataset, aligned_originals, normalized_difference_std
from .seeding import derive_rng, derive_seed
from .spectral import eigendecompose

METRIC_COLUMNS = ("NImin", "NIavg", "ICAmin", "ICAavg", "IOmin", "IOavg")


@dataclass(frozen=True)
class AttackReport:
    method: str
    ni_min: float
    ni_avg: float
    ica_min: float
    ica_avg: float
    io_min: float
    io_avg: float
    ica_converged: bool = True

    def values(self) -> tuple[float, ...]:
        return (self.ni_min, self.ni_avg, self.ica_min, self.ica_avg, self.io_min, self.io_avg)


def _min_avg(stds: np.ndarray) -> tuple[float, float]:
    return float(stds.min()), float(stds.mean())


# -- naive inference ---------------------------------------------------------------

def naive_inference_metric(d: Dataset, p: PerturbedDataset) -> tuple[float, float]:
    return _min_avg(normalized_difference_std(aligned_originals(d, p), p.data.values))


# -- known input/output --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KnownPairs:
    fraction: float
    rows: np.ndarray
    originals: np.ndarray
    perturbed: np.ndarray

    def __len__(self) -> int:
        return len(self.rows)


def sample_known_pairs(d: Dataset, p: PerturbedDataset, fraction: float = 0.10,
                       seed: int = 0) -> KnownPairs:
    """Uniformly chosen output rows together with their true originals."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("known fraction must lie in (0, 1]")
    x = aligned_originals(d, p)
    m = x.shape[0]
    count = min(m, max(1, int(round(fraction * m))))
    rows = np.sort(derive_rng(seed, "known-pairs").choice(m, size=count, replace=False))
    return KnownPairs(fraction, rows, x[rows], p.data.values[rows])


@dataclass(frozen=True, eq=False)
class IOAttackResult:
    reconstructed: np.ndarray
    io_min: float
    io_avg: float
    map_matrix: np.ndarray
    offset: np.ndarray


def known_io_attack(d: Dataset, p: PerturbedDataset, known: KnownPairs) -> IOAttackResult:
    """Fit ``y = M x + b`` to the known pairs by least squares, then invert it
    on every perturbed row (pseudo-inverse when ``M`` is singular)."""
    if len(known) == 0:
        raise ValueError("no known pairs")
    xk, yk = known.originals, known.perturbed
    if xk.shape != yk.shape:
        raise DimensionMismatch("known originals and perturbed records differ in arity")
    aug = np.hstack([xk, np.ones((xk.shape[0], 1))])
    try:
        coef, *_ = np.linalg.lstsq(aug, yk, rcond=None)
        b_lin, offset = coef[:-1], coef[-1]  # y = x @ b_lin + offset
        inv = np.linalg.pinv(b_lin)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSystem(f"least-squares fit failed: {exc}") from exc
    recon = (p.data.values - offset) @ inv
    lo, avg = _min_avg(normalized_difference_std(aligned_originals(d, p), recon))
    return IOAttackResult(recon, lo, avg, b_lin.T, offset)


# -- ICA -----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ICAResult:
    sources: np.ndarray
    unmixing: np.ndarray
    mixing: np.ndarray
    mean: np.ndarray
    whitening: np.ndarray
    converged: np.ndarray = field(default=None)
    iterations: np.ndarray = field(default=None)


def whiten(x: np.ndarray, components: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centre and decorrelate; returns (whitened rows, whitening matrix, mean)."""
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / x.shape[0]
    e = eigendecompose((cov + cov.T) / 2.0)
    lam = e.eigenvalues[:components]
    floor = np.finfo(float).eps * max(float(e.eigenvalues[0]), 1e-300)
    k = (e.eigenvectors[:, :components] / np.sqrt(np.maximum(lam, floor))).T
    return xc @ k.T, k, mean


def fast_ica(x: np.ndarray, components: int | None = None, seed: int = 0,
             max_iter: int = 200, tol: float = 1e-4) -> ICAResult:
    """Deflationary FastICA with the ``tanh`` contrast.

    A component that is still moving after ``max_iter`` updates is flagged in
    ``converged`` and a :class:`NonConvergenceWarning` is issued; the estimate
    so far is kept.
    """
    x = np.asarray(x, dtype=np.float64)
    m, n = x.shape
    c = n if components is None else int(components)
    if not 1 <= c <= n or m < c:
        raise ValueError(f"cannot extract {c} components from {m}x{n} data")
    xw, k, mean = whiten(x, c)
    rng = derive_rng(seed, "ica-init")
    w_all = np.zeros((c, c))
    converged = np.zeros(c, dtype=bool)
    iters = np.zeros(c, dtype=int)
    for p in range(c):
        w = rng.standard_normal(c)
        w -= w_all[:p].T @ (w_all[:p] @ w)
        w /= np.linalg.norm(w)
        for it in range(1, max_iter + 1):
            g = np.tanh(xw @ w)
            w_new = xw.T @ g / m - (1.0 - g * g).mean() * w
            w_new -= w_all[:p].T @ (w_all[:p] @ w_new)
            w_new /= np.linalg.norm(w_new)
            delta = abs(abs(float(w_new @ w)) - 1.0)
            w = w_new
            if delta < tol:
                converged[p] = True
                break
        iters[p] = it
        w_all[p] = w
    if not converged.all():
        warnings.warn(f"FastICA: {int((~converged).sum())} of {c} components did not converge "
                      f"in {max_iter} iterations", NonConvergenceWarning, stacklevel=2)
    unmixing = w_all @ k
    return ICAResult(xw @ w_all.T, unmixing, np.linalg.pinv(unmixing), mean, k, converged, iters)


def _signed_corr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Signed correlation between the columns of ``a`` and ``b`` (0 for constant columns)."""
    return zscore(a).T @ zscore(b) / a.shape[0]


def greedy_alignment(corr: np.ndarray) -> list[tuple[int, int]]:
    """Pairs (component, attribute) by repeatedly taking the largest |corr|."""
    a = np.abs(corr).astype(float)
    pairs = []
    for _ in range(min(a.shape)):
        i, j = np.unravel_index(int(np.argmax(a)), a.shape)
        pairs.append((int(i), int(j)))
        a[i, :] = -1.0
        a[:, j] = -1.0
    return pairs


@dataclass(frozen=True, eq=False)
class ICAAttackResult:
    ica_min: float
    ica_avg: float
    reconstructed: np.ndarray
    alignment: list
    converged: bool


def ica_attack(d: Dataset, p: PerturbedDataset, seed: int = 0,
               max_iter: int = 200, tol: float = 1e-4) -> ICAAttackResult:
    x = aligned_originals(d, p)
    n = x.shape[1]
    if n < 2:
        raise ValueError("ICA attack needs at least two attributes")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonConvergenceWarning)
        res = fast_ica(p.data.values, n, seed=seed, max_iter=max_iter, tol=tol)
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    corr = _signed_corr(res.sources, x)
    pairs = greedy_alignment(corr)
    mean, std = x.mean(axis=0), x.std(axis=0)
    zs = zscore(res.sources)
    recon = np.empty_like(x)
    for comp, attr in pairs:
        sign = -1.0 if corr[comp, attr] < 0 else 1.0
        recon[:, attr] = sign * zs[:, comp] * std[attr] + mean[attr]
    lo, avg = _min_avg(normalized_difference_std(x, recon))
    return ICAAttackResult(lo, avg, recon, pairs, bool(res.converged.all()))


def run_attacks(d: Dataset, p: PerturbedDataset, method: str, known_fraction: float = 0.10,
                seed: int = 0) -> AttackReport:
    ni = naive_inference_metric(d, p)
    known = sample_known_pairs(d, p, known_fraction, derive_seed(seed, "known-pairs"))
    io = known_io_attack(d, p, known)
    ica = ica_attack(d, p, derive_seed(seed, "ica"))
    return AttackReport(method, ni[0], ni[1], ica.ica_min, ica.ica_avg, io.io_min, io.io_avg,
                        ica.converged)

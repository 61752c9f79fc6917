"""Group covariance, symmetric eigendecomposition and rotation matrices.

The eigenvector matrix of a group covariance is orthonormal, and so is any
column permutation of it; a seeded column shuffle therefore turns each
group's eigenbasis into a randomised rotation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .dataset import Record
from .errors import ConvergenceFailure, DimensionMismatch

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SIGN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    entries: np.ndarray
    group_size: int

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def is_zero(self) -> bool:
        return not np.any(self.entries)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    entries: np.ndarray
    source_shuffle: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def is_identity(self, atol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.entries - np.eye(self.n))) <= atol)


def covariance_from_stats(sums, product_sums, group_size: int) -> CovarianceMatrix:
    """Population covariance from first- and second-order sums."""
    sums = np.asarray(sums, dtype=np.float64)
    product_sums = np.asarray(product_sums, dtype=np.float64)
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    n = sums.shape[0]
    if product_sums.shape != (n, n):
        raise DimensionMismatch(f"product sums {product_sums.shape} for {n} attributes")
    if group_size == 1:
        return CovarianceMatrix(np.zeros((n, n)), 1)
    mean = sums / group_size
    c = product_sums / group_size - np.outer(mean, mean)
    c = (c + c.T) / 2.0
    return CovarianceMatrix(c, group_size)


def group_covariance(x: np.ndarray) -> CovarianceMatrix:
    """Covariance of the rows of ``x``, through the same sufficient statistics.

    Rows are summed in the given order; grouping hands them over in a
    deterministic order already.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] == 1:
        return CovarianceMatrix(np.zeros((x.shape[1], x.shape[1])), 1)
    prods = x.T @ x
    return covariance_from_stats(x.sum(axis=0), (prods + prods.T) / 2.0, x.shape[0])


def eigendecompose(c: CovarianceMatrix | np.ndarray) -> EigenSystem:
    """Full spectrum of a real symmetric matrix, eigenvalues descending.

    Each eigenvector is signed so its first non-negligible entry is positive.
    """
    a = c.entries if isinstance(c, CovarianceMatrix) else np.asarray(c, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    w, v, sweeps, converged = _backend.kernels.jacobi_eigh(
        np.ascontiguousarray(a, dtype=np.float64), JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if not converged:
        raise ConvergenceFailure(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(v.shape[1]):
        nz = np.flatnonzero(np.abs(v[:, j]) > SIGN_TOL)
        if nz.size and v[nz[0], j] < 0:
            v[:, j] = -v[:, j]
    return EigenSystem(w, v, sweeps)


def shuffle_columns(e: EigenSystem, rng: np.random.Generator | int,
                    permutation: Sequence[int] | None = None) -> RotationMatrix:
    p = e.eigenvectors
    if permutation is None:
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        permutation = rng.permutation(p.shape[1])
    permutation = np.asarray(permutation, dtype=np.intp)
    return RotationMatrix(np.ascontiguousarray(p[:, permutation]), permutation)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix, signs fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def apply_rotation(r: RotationMatrix | np.ndarray, rows):
    """Rotate every row vector ``x`` to ``R @ x``; labels are left alone.

    ``rows`` is either an ``(m, n)`` array (an array comes back) or a sequence
    of :class:`Record` (a list of records comes back, row order kept).
    """
    mat = r.entries if isinstance(r, RotationMatrix) else np.asarray(r, dtype=np.float64)
    if isinstance(rows, np.ndarray):
        if rows.ndim != 2 or rows.shape[1] != mat.shape[0]:
            raise DimensionMismatch(f"rows of arity {rows.shape[-1]} vs {mat.shape[0]}x{mat.shape[0]} rotation")
        return rows @ mat.T
    rows = list(rows)
    if not rows:
        return []
    x = np.array([rec.values for rec in rows], dtype=np.float64)
    if x.shape[1] != mat.shape[0]:
        raise DimensionMismatch(f"records of arity {x.shape[1]} vs {mat.shape[0]}x{mat.shape[0]} rotation")
    y = x @ mat.T
    return [Record(y[i], rec.label) for i, rec in enumerate(rows)]

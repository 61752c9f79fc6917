"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Each function mirrors its compiled twin operation for operation (same
accumulation order over attributes, same tie rules), so both backends give
the same groupings and assignments.
"""
import math

import numpy as np


def _seq_sum(values):
    # left-to-right, like the compiled loop
    acc = 0.0
    for v in values.ravel().tolist():
        acc += v
    return acc


def _offdiag_norm(a):
    sq = a * a
    np.fill_diagonal(sq, 0.0)
    return math.sqrt(_seq_sum(sq))


def jacobi_eigh(a_in, tol_rel, max_sweeps):
    a = np.array(a_in, dtype=np.float64, order="C")
    n = a.shape[0]
    v = np.eye(n)
    thresh = tol_rel * math.sqrt(_seq_sum(a * a))
    sweep = 0
    converged = False
    while True:
        if _offdiag_norm(a) <= thresh:
            converged = True
            break
        if sweep >= max_sweeps:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                x = a[:, p].copy()
                y = a[:, q].copy()
                a[:, p] = c * x - s * y
                a[:, q] = s * x + c * y
                x = a[p, :].copy()
                y = a[q, :].copy()
                a[p, :] = c * x - s * y
                a[q, :] = s * x + c * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                x = v[:, p].copy()
                y = v[:, q].copy()
                v[:, p] = c * x - s * y
                v[:, q] = s * x + c * y
    return np.diagonal(a).copy(), v, sweep, converged


def _sq_dist_to(x, rows, point):
    acc = np.zeros(len(rows))
    for j in range(x.shape[1]):
        diff = x[rows, j] - point[j]
        acc += diff * diff
    return acc


def group_by_size(x, kprime, u):
    m = x.shape[0]
    rem = np.arange(m, dtype=np.intp)
    order = []
    starts = []
    g = 0
    while len(rem):
        starts.append(len(order))
        r = len(rem)
        pos = min(int(u[g] * r), r - 1)
        pivot = rem[pos]
        g += 1
        cand = np.delete(rem, pos)
        want = min(kprime - 1, r - 1)
        if want > 0:
            d2 = _sq_dist_to(x, cand, x[pivot])
            if want < len(cand):
                kth = np.partition(d2, want - 1)[want - 1]
                below = np.flatnonzero(d2 < kth)
                ties = np.flatnonzero(d2 == kth)[: want - len(below)]
                keep = np.concatenate([below, ties])
            else:
                keep = np.arange(len(cand))
            keep = keep[np.lexsort((cand[keep], d2[keep]))]
            chosen = cand[keep]
        else:
            chosen = cand[:0]
        order.append(pivot)
        order.extend(chosen.tolist())
        taken = np.zeros(m, dtype=bool)
        taken[pivot] = True
        taken[chosen] = True
        rem = rem[~taken[rem]]
    return np.asarray(order, dtype=np.intp), np.asarray(starts, dtype=np.intp)


def assign_nearest(x, centers):
    m = x.shape[0]
    best = np.zeros(m, dtype=np.intp)
    bestd = None
    for c in range(centers.shape[0]):
        acc = np.zeros(m)
        for j in range(x.shape[1]):
            diff = x[:, j] - centers[c, j]
            acc += diff * diff
        if bestd is None:
            bestd = acc
        else:
            better = acc < bestd
            best[better] = c
            bestd = np.where(better, acc, bestd)
    return best, bestd

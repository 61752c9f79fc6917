# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  ``_fallback.py`` holds the numpy twins; both must
perform the same floating-point operations in the same order."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def jacobi_eigh(const double[:, ::1] a_in, double tol_rel, int max_sweeps):
    """Cyclic Jacobi diagonalisation of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps, converged)``; eigenvalues
    are unsorted, eigenvectors are the columns of the second array.
    """
    cdef Py_ssize_t n = a_in.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A_arr = np.array(a_in, dtype=np.float64, order="C")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] A = A_arr
    cdef double[:, ::1] V = V_arr
    cdef Py_ssize_t p, q, k
    cdef double fro = 0.0, off, thresh, apq, theta, t, c, s, x, y
    cdef int sweep = 0
    cdef bint converged = False

    for p in range(n):
        for q in range(n):
            fro += A[p, q] * A[p, q]
    thresh = tol_rel * sqrt(fro)

    while True:
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += A[p, q] * A[p, q]
        if sqrt(off) <= thresh:
            converged = True
            break
        if sweep >= max_sweeps:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    x = A[k, p]
                    y = A[k, q]
                    A[k, p] = c * x - s * y
                    A[k, q] = s * x + c * y
                for k in range(n):
                    x = A[p, k]
                    y = A[q, k]
                    A[p, k] = c * x - s * y
                    A[q, k] = s * x + c * y
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    x = V[k, p]
                    y = V[k, q]
                    V[k, p] = c * x - s * y
                    V[k, q] = s * x + c * y

    w = np.empty(n, dtype=np.float64)
    for p in range(n):
        w[p] = A[p, p]
    return w, V_arr, sweep, converged


cdef inline bint _less(double da, Py_ssize_t ia, double db, Py_ssize_t ib) nogil:
    return da < db or (da == db and ia < ib)


cdef void _sift_down(double* hd, Py_ssize_t* hi, Py_ssize_t size, Py_ssize_t pos) nogil:
    # max-heap on (distance, index)
    cdef Py_ssize_t child, big
    cdef double td
    cdef Py_ssize_t ti
    while True:
        child = 2 * pos + 1
        if child >= size:
            return
        big = child
        if child + 1 < size and _less(hd[child], hi[child], hd[child + 1], hi[child + 1]):
            big = child + 1
        if _less(hd[pos], hi[pos], hd[big], hi[big]):
            td = hd[pos]; hd[pos] = hd[big]; hd[big] = td
            ti = hi[pos]; hi[pos] = hi[big]; hi[big] = ti
            pos = big
        else:
            return


cdef void _sift_up(double* hd, Py_ssize_t* hi, Py_ssize_t pos) nogil:
    cdef Py_ssize_t parent
    cdef double td
    cdef Py_ssize_t ti
    while pos > 0:
        parent = (pos - 1) // 2
        if _less(hd[parent], hi[parent], hd[pos], hi[pos]):
            td = hd[pos]; hd[pos] = hd[parent]; hd[parent] = td
            ti = hi[pos]; hi[pos] = hi[parent]; hi[parent] = ti
            pos = parent
        else:
            return


def group_by_size(const double[:, ::1] X, Py_ssize_t kprime, const double[::1] u):
    """Greedy fixed-size grouping.

    ``u[g]`` in [0, 1) picks the pivot of group ``g`` among the remaining rows
    (kept in ascending index order).  Returns ``(order, starts)``: row indices
    in formation order (pivot first, then neighbours by (distance, index)) and
    the offset of each group in ``order``.
    """
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] rem_arr = np.arange(m, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order_arr = np.empty(m, dtype=np.intp)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hd_arr = np.empty(max(kprime, 1), dtype=np.float64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] hi_arr = np.empty(max(kprime, 1), dtype=np.intp)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] taken_arr = np.zeros(m, dtype=np.uint8)
    cdef Py_ssize_t[::1] rem = rem_arr
    cdef Py_ssize_t[::1] order = order_arr
    cdef double* hd = <double*> hd_arr.data
    cdef Py_ssize_t* hi = <Py_ssize_t*> hi_arr.data
    cdef unsigned char[::1] taken = taken_arr
    cdef Py_ssize_t r = m, out = 0, g = 0, pos, pivot, i, j, idx, size, want, w, last
    cdef double acc, diff, td
    cdef Py_ssize_t ti
    starts = []

    while r > 0:
        starts.append(out)
        pos = <Py_ssize_t>(u[g] * r)
        if pos >= r:
            pos = r - 1
        pivot = rem[pos]
        g += 1
        want = kprime - 1
        if want > r - 1:
            want = r - 1
        size = 0
        for i in range(r):
            idx = rem[i]
            if idx == pivot:
                continue
            acc = 0.0
            for j in range(n):
                diff = X[idx, j] - X[pivot, j]
                acc += diff * diff
            if size < want:
                hd[size] = acc
                hi[size] = idx
                _sift_up(hd, hi, size)
                size += 1
            elif size > 0 and _less(acc, idx, hd[0], hi[0]):
                hd[0] = acc
                hi[0] = idx
                _sift_down(hd, hi, size, 0)
        # heap-sort the selection into ascending (distance, index)
        last = size
        while last > 1:
            last -= 1
            td = hd[0]; hd[0] = hd[last]; hd[last] = td
            ti = hi[0]; hi[0] = hi[last]; hi[last] = ti
            _sift_down(hd, hi, last, 0)
        order[out] = pivot
        taken[pivot] = 1
        out += 1
        for i in range(size):
            order[out] = hi[i]
            taken[hi[i]] = 1
            out += 1
        w = 0
        for i in range(r):
            if not taken[rem[i]]:
                rem[w] = rem[i]
                w += 1
        r = w
    return order_arr, np.array(starts, dtype=np.intp)


def assign_nearest(const double[:, ::1] X, const double[:, ::1] C):
    """Nearest centre per row by squared Euclidean distance (lowest index on ties)."""
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1], k = C.shape[0]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] lab_arr = np.empty(m, dtype=np.intp)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d_arr = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t[::1] lab = lab_arr
    cdef double[::1] dmin = d_arr
    cdef Py_ssize_t i, c, j, best
    cdef double acc, diff, bestd
    with nogil:
        for i in range(m):
            best = 0
            bestd = 0.0
            for c in range(k):
                acc = 0.0
                for j in range(n):
                    diff = X[i, j] - C[c, j]
                    acc += diff * diff
                if c == 0 or acc < bestd:
                    bestd = acc
                    best = c
            lab[i] = best
            dmin[i] = bestd
    return lab_arr, d_arr

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: cyclic Jacobi eigendecomposition and Qn selection.

Same contracts as ``_fallback``; see that module for the algorithms.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

DEF MAX_SWEEPS = 100


cdef double _offdiag_norm(double[:, ::1] A, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += A[i, j] * A[i, j]
    return sqrt(s)


def jacobi_eigh(a, double tol=1e-12):
    cdef double[:, ::1] A = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    V_arr = np.eye(n)
    cdef double[:, ::1] V = V_arr
    cdef Py_ssize_t p, q, k
    cdef int sweeps = 0
    cdef double norm = 0.0, threshold, apq, theta, t, c, s, x, y

    for p in range(n):
        for q in range(n):
            norm += A[p, q] * A[p, q]
    norm = sqrt(norm)
    if n == 1 or norm == 0.0:
        return np.asarray(A).diagonal().copy(), V_arr, 0
    threshold = tol * norm

    with nogil:
        while True:
            if _offdiag_norm(A, n) <= threshold or sweeps == MAX_SWEEPS:
                break
            sweeps += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        x = A[k, p]
                        y = A[k, q]
                        A[k, p] = x * c - y * s
                        A[k, q] = x * s + y * c
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
                        V[k, p] = x * c - y * s
                        V[k, q] = x * s + y * c
    return np.asarray(A).diagonal().copy(), V_arr, sweeps


cdef struct WeightedValue:
    double value
    double weight


cdef int _cmp_weighted(const void *a, const void *b) noexcept nogil:
    cdef double va = (<WeightedValue *>a).value
    cdef double vb = (<WeightedValue *>b).value
    if va < vb:
        return -1
    if va > vb:
        return 1
    return 0


cdef int _cmp_double(const void *a, const void *b) noexcept nogil:
    cdef double va = (<double *>a)[0]
    cdef double vb = (<double *>b)[0]
    if va < vb:
        return -1
    if va > vb:
        return 1
    return 0


cdef Py_ssize_t _count_row(const double *y, Py_ssize_t n, Py_ssize_t i,
                           double trial, bint strict) noexcept nogil:
    # first j in (i, n) where the row condition fails
    cdef Py_ssize_t lo = i + 1, hi = n, mid
    cdef double d
    while lo < hi:
        mid = (lo + hi) // 2
        d = y[mid] - y[i]
        if (d < trial) if strict else (d <= trial):
            lo = mid + 1
        else:
            hi = mid
    return lo - (i + 1)


def qn_order_statistic(y_in, long long k):
    cdef double[::1] yv = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    cdef const double *y = &yv[0]
    cdef Py_ssize_t m = n - 1
    cdef Py_ssize_t i, j, live, idx
    cdef long long remaining, sum_below, sum_upto, skipped
    cdef double trial, total, cum, result = 0.0
    cdef bint found = False
    cdef Py_ssize_t *left = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t *right = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t *below = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t *upto = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    cdef WeightedValue *meds = <WeightedValue *>malloc(m * sizeof(WeightedValue))
    cdef double *cand = NULL
    if not left or not right or not below or not upto or not meds:
        raise MemoryError()
    try:
        with nogil:
            for i in range(m):
                left[i] = i + 1
                right[i] = n - 1
            while True:
                remaining = 0
                live = 0
                total = 0.0
                for i in range(m):
                    if left[i] <= right[i]:
                        remaining += right[i] - left[i] + 1
                        meds[live].value = y[(left[i] + right[i]) // 2] - y[i]
                        meds[live].weight = <double>(right[i] - left[i] + 1)
                        total += meds[live].weight
                        live += 1
                if remaining <= n:
                    break
                qsort(meds, live, sizeof(WeightedValue), _cmp_weighted)
                cum = 0.0
                idx = live - 1
                for j in range(live):
                    cum += meds[j].weight
                    if cum > total / 2.0:
                        idx = j
                        break
                trial = meds[idx].value
                sum_below = 0
                sum_upto = 0
                for i in range(m):
                    below[i] = _count_row(y, n, i, trial, True)
                    upto[i] = _count_row(y, n, i, trial, False)
                    sum_below += below[i]
                    sum_upto += upto[i]
                if k <= sum_below:
                    for i in range(m):
                        if i + below[i] < right[i]:
                            right[i] = i + below[i]
                elif k > sum_upto:
                    for i in range(m):
                        if i + upto[i] + 1 > left[i]:
                            left[i] = i + upto[i] + 1
                else:
                    found = True
                    result = trial
                    break
            if not found:
                skipped = 0
                for i in range(m):
                    skipped += left[i] - i - 1
                cand = <double *>malloc((remaining + 1) * sizeof(double))
                if cand != NULL:
                    idx = 0
                    for i in range(m):
                        for j in range(left[i], right[i] + 1):
                            cand[idx] = y[j] - y[i]
                            idx += 1
                    qsort(cand, idx, sizeof(double), _cmp_double)
                    result = cand[k - skipped - 1]
        if not found and cand == NULL:
            raise MemoryError()
        return result
    finally:
        free(left)
        free(right)
        free(below)
        free(upto)
        free(meds)
        free(cand)

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Mirrors ``_pykernels`` operation for operation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t fmix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def random_bits(hi, lo, start, Py_ssize_t n):
    cdef uint64_t h = <uint64_t>hi
    cdef uint64_t l = <uint64_t>lo
    cdef uint64_t c0 = <uint64_t>((start + 1) & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = fmix(h ^ fmix(l + (c0 + <uint64_t>i) * GAMMA))
    return out


def matmul(const double[:, :] a, const double[:, :] b):
    cdef Py_ssize_t n = a.shape[0], k = a.shape[1], m = b.shape[1]
    cdef Py_ssize_t i, j, r
    cdef double acc
    out = np.zeros((n, m))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for r in range(k):
                    acc = acc + a[i, r] * b[r, j]
                o[i, j] = acc
    return out


cdef inline void rotation(double app, double aqq, double apq, double* c, double* s) nogil:
    cdef double theta = (aqq - app) / (2.0 * apq)
    cdef double t
    if fabs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c[0] = 1.0 / sqrt(t * t + 1.0)
    s[0] = t * c[0]


def jacobi_eig(a_in, int max_sweeps, double tol):
    a_np = np.array(a_in, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t n = a_np.shape[0]
    v_np = np.eye(n)
    cdef double[:, ::1] a = a_np
    cdef double[:, ::1] v = v_np
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double scale = 0.0, off, apq, c, s, x, y
    for p in range(n):
        for q in range(n):
            if fabs(a[p, q]) > scale:
                scale = fabs(a[p, q])
    if scale == 0.0:
        return np.diag(a_np).copy(), v_np, 0, True
    with nogil:
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    if fabs(a[p, q]) > off:
                        off = fabs(a[p, q])
            if off <= tol * scale:
                with gil:
                    return np.diag(a_np).copy(), v_np, sweep, True
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    rotation(a[p, p], a[q, q], apq, &c, &s)
                    for k in range(n):
                        x = a[k, p]
                        y = a[k, q]
                        a[k, p] = c * x - s * y
                        a[k, q] = s * x + c * y
                    for k in range(n):
                        x = a[p, k]
                        y = a[q, k]
                        a[p, k] = c * x - s * y
                        a[q, k] = s * x + c * y
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = c * x - s * y
                        v[k, q] = s * x + c * y
    return np.diag(a_np).copy(), v_np, max_sweeps, False


def nd_rank(const double[:, :] fit):
    cdef Py_ssize_t n = fit.shape[0], m = fit.shape[1]
    cdef Py_ssize_t i, j, r, assigned = 0
    cdef bint le_all, lt_any, ge_all, gt_any
    cdef int64_t current = 0
    dom_np = np.zeros((n, n), dtype=np.uint8)
    rank_np = np.full(n, -1, dtype=np.int64)
    count_np = np.zeros(n, dtype=np.int64)
    cdef unsigned char[:, ::1] dom = dom_np
    cdef int64_t[::1] rank = rank_np
    cdef int64_t[::1] count = count_np
    cdef int64_t[::1] front = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t nfront
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                le_all = True
                lt_any = False
                ge_all = True
                gt_any = False
                for r in range(m):
                    if fit[i, r] > fit[j, r]:
                        le_all = False
                        gt_any = True
                    elif fit[i, r] < fit[j, r]:
                        ge_all = False
                        lt_any = True
                if le_all and lt_any:
                    dom[i, j] = 1
                    count[j] += 1
                elif ge_all and gt_any:
                    dom[j, i] = 1
                    count[i] += 1
        while assigned < n:
            nfront = 0
            for i in range(n):
                if rank[i] < 0 and count[i] == 0:
                    front[nfront] = i
                    nfront += 1
            for r in range(nfront):
                rank[front[r]] = current
            assigned += nfront
            for r in range(nfront):
                i = front[r]
                for j in range(n):
                    if dom[i, j]:
                        count[j] -= 1
            current += 1
    return rank_np

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: cyclic Jacobi, bitset MIS branch and bound, pairwise
re-orthogonalization. Semantics match ``_kernels_py`` exactly."""

import numpy as np

from libc.math cimport sqrt, fabs, copysign
from libc.stdint cimport uint64_t

cdef extern from *:
    """
    static inline int cc_ctz64(unsigned long long x) { return __builtin_ctzll(x); }
    """
    int cc_ctz64(unsigned long long x) nogil


def jacobi_eigh(a, double tol=1e-15, int max_sweeps=60):
    cdef double[:, ::1] A = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    V_arr = np.eye(n)
    cdef double[:, ::1] V = V_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep, status = -1
    cdef double fro = 0.0, off, apq, theta, t, c, s, x, y
    if n < 2:
        return np.asarray(A).diagonal().copy(), V_arr, 0
    for p in range(n):
        for q in range(n):
            fro += A[p, q] * A[p, q]
    fro = sqrt(fro)
    if fro == 0.0:
        return np.zeros(n), V_arr, 0
    with nogil:
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += A[p, q] * A[p, q]
            off = sqrt(2.0 * off)
            if off <= tol * fro:
                status = sweep
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0))
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
    return np.asarray(A).diagonal().copy(), V_arr, status


cdef struct MisState:
    uint64_t adj[64]
    int best
    uint64_t best_mask


cdef int _color_sort(uint64_t mask, MisState* st, int* order, int* bounds) noexcept nogil:
    cdef uint64_t remaining = mask, cand
    cdef int k = 0, cnt = 0, v
    while remaining:
        k += 1
        cand = remaining
        while cand:
            v = cc_ctz64(cand)
            cand &= st.adj[v]
            remaining &= ~((<uint64_t>1) << v)
            order[cnt] = v
            bounds[cnt] = k
            cnt += 1
    return cnt


cdef void _expand(uint64_t mask, int size, uint64_t current, MisState* st) noexcept nogil:
    cdef int order[64]
    cdef int bounds[64]
    cdef int cnt = _color_sort(mask, st, order, bounds)
    cdef int idx, v
    cdef uint64_t bit, rest
    idx = cnt - 1
    while idx >= 0:
        if size + bounds[idx] <= st.best:
            return
        v = order[idx]
        bit = (<uint64_t>1) << v
        rest = mask & ~st.adj[v] & ~bit
        if rest == 0:
            if size + 1 > st.best:
                st.best = size + 1
                st.best_mask = current | bit
        else:
            _expand(rest, size + 1, current | bit, st)
        mask &= ~bit
        idx -= 1


def max_independent_set(adj, int n):
    if n > 64:
        raise ValueError("compiled MIS kernel supports at most 64 vertices")
    cdef MisState st
    cdef int i
    st.best = 0
    st.best_mask = 0
    for i in range(64):
        st.adj[i] = 0
    for i in range(n):
        st.adj[i] = <uint64_t>int(adj[i])
    if n > 0:
        with nogil:
            if n == 64:
                _expand(~(<uint64_t>0), 0, 0, &st)
            else:
                _expand(((<uint64_t>1) << n) - 1, 0, 0, &st)
    return st.best, int(st.best_mask)


def orthogonalize_pairs(vectors, pairs, double tol=1e-12, int max_sweeps=100):
    vec_arr = np.array(vectors, dtype=np.float64, order="C", copy=True)
    pair_arr = np.ascontiguousarray(np.asarray(pairs, dtype=np.int64).reshape(-1, 2))
    cdef double[:, ::1] vec = vec_arr
    cdef long long[:, ::1] pr = pair_arr
    cdef Py_ssize_t m = pr.shape[0], d = vec.shape[1], e, k, i, j
    cdef int sweep, status = -1
    cdef double residual = 0.0, c, a, b, nu, nw
    if m == 0:
        return vec_arr, 0, 0.0
    with nogil:
        for sweep in range(max_sweeps + 1):
            residual = 0.0
            for e in range(m):
                i = pr[e, 0]
                j = pr[e, 1]
                c = 0.0
                for k in range(d):
                    c += vec[i, k] * vec[j, k]
                if fabs(c) > residual:
                    residual = fabs(c)
            if residual < tol:
                status = sweep
                break
            if sweep == max_sweeps:
                break
            for e in range(m):
                i = pr[e, 0]
                j = pr[e, 1]
                c = 0.0
                for k in range(d):
                    c += vec[i, k] * vec[j, k]
                if c == 0.0:
                    continue
                nu = 0.0
                nw = 0.0
                for k in range(d):
                    a = vec[i, k]
                    b = vec[j, k]
                    vec[i, k] = a - 0.5 * c * b
                    vec[j, k] = b - 0.5 * c * a
                    nu += vec[i, k] * vec[i, k]
                    nw += vec[j, k] * vec[j, k]
                nu = sqrt(nu)
                nw = sqrt(nw)
                for k in range(d):
                    vec[i, k] /= nu
                    vec[j, k] /= nw
    return vec_arr, status, residual

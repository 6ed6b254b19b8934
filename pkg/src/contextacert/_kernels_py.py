"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` one-for-one and are selected automatically when
the compiled extension is unavailable (or when ``CONTEXTACERT_PURE_PYTHON=1``).
"""

import math

import numpy as np


def jacobi_eigh(a, tol=1e-15, max_sweeps=60):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps)``; eigenvalues are unsorted
    and ``sweeps`` is -1 when the sweep cap was hit before convergence.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return a.diagonal().copy(), v, 0
    fro = math.sqrt(float(np.sum(a * a)))
    if fro == 0.0:
        return np.zeros(n), v, 0
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(2.0 * float(np.sum(a[iu] ** 2)))
        if off <= tol * fro:
            return a.diagonal().copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return a.diagonal().copy(), v, -1


def _lowbit_index(x):
    return (x & -x).bit_length() - 1


def _color_sort(mask, adj):
    # Greedy partition of ``mask`` into cliques of G; a clique holds at most one
    # vertex of any independent set, so the running class count is an upper bound.
    order = []
    bounds = []
    remaining = mask
    k = 0
    while remaining:
        k += 1
        cand = remaining
        while cand:
            v = _lowbit_index(cand)
            cand &= adj[v]
            remaining &= ~(1 << v)
            order.append(v)
            bounds.append(k)
    return order, bounds


def max_independent_set(adj, n):
    """Exact maximum independent set by bitset branch and bound.

    ``adj[v]`` is the neighbour bitmask of vertex ``v`` (0-based, no self bit).
    Returns ``(size, mask)`` where ``mask`` encodes one optimal set.
    """
    adj = [int(x) for x in adj]
    best = [0, 0]

    def expand(mask, size, current):
        order, bounds = _color_sort(mask, adj)
        for idx in range(len(order) - 1, -1, -1):
            if size + bounds[idx] <= best[0]:
                return
            v = order[idx]
            bit = 1 << v
            rest = mask & ~adj[v] & ~bit
            if rest == 0:
                if size + 1 > best[0]:
                    best[0] = size + 1
                    best[1] = current | bit
            else:
                expand(rest, size + 1, current | bit)
            mask &= ~bit

    if n > 0:
        expand((1 << n) - 1, 0, 0)
    return best[0], best[1]


def orthogonalize_pairs(vectors, pairs, tol=1e-12, max_sweeps=100):
    """Symmetric pairwise re-orthogonalization over ``pairs`` in fixed order.

    Each visit replaces ``(u, w)`` by normalized ``(u - c/2 w, w - c/2 u)`` with
    ``c = <u, w>``. Returns ``(vectors, sweeps, residual)``; ``sweeps`` is -1 if
    the cap was reached with ``residual >= tol``.
    """
    vec = np.array(vectors, dtype=np.float64, copy=True)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    for sweep in range(max_sweeps + 1):
        if len(pairs) == 0:
            return vec, sweep, 0.0
        residual = float(np.max(np.abs(np.einsum("ij,ij->i", vec[pairs[:, 0]], vec[pairs[:, 1]]))))
        if residual < tol:
            return vec, sweep, residual
        if sweep == max_sweeps:
            return vec, -1, residual
        for i, j in pairs:
            u = vec[i]
            w = vec[j]
            c = float(u @ w)
            if c == 0.0:
                continue
            nu = u - 0.5 * c * w
            nw = w - 0.5 * c * u
            vec[i] = nu / math.sqrt(float(nu @ nu))
            vec[j] = nw / math.sqrt(float(nw @ nw))
    return vec, -1, residual

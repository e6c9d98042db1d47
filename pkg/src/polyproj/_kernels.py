"""Compiled minimum-|det| enumerators over vertex and facet tuples.

All kernels return the exact minimum over their tuple family (min is
order-free, so results do not depend on traversal order), the argmin tuple,
the number of tuples visited, and optionally every tuple whose |det| is at
most ``thresh`` (``thresh < 0`` disables collection). Collection stops
filling at ``cap`` entries but keeps counting; callers compare the returned
count with ``cap`` to detect overflow.

Facet-tuple kernels assume the antipodal layout of ``hull.Polytope``: facet
``k + M`` is ``-facet k``. Admissible facet tuples have pairwise disjoint
vertex sets and no two members from the same antipodal orbit; each tuple is
visited once up to a global sign flip (first member taken from ``[0, M)``).
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _disjoint3(fv, a, b):
    for i in range(3):
        x = fv[a, i]
        if x == fv[b, 0] or x == fv[b, 1] or x == fv[b, 2]:
            return False
    return True


@njit(cache=True)
def _disjoint(fv, a, b):
    n = fv.shape[1]
    for i in range(n):
        for j in range(n):
            if fv[a, i] == fv[b, j]:
                return False
    return True


@njit(cache=True)
def alpha3(X, thresh, cap):
    N = X.shape[0]
    best = np.inf
    arg = np.full(3, -1, np.int64)
    out_idx = np.empty((cap, 3), np.int64)
    out_val = np.empty(cap)
    ncol = 0
    count = 0
    for i in range(N):
        for j in range(i + 1, N):
            c0 = X[i, 1] * X[j, 2] - X[i, 2] * X[j, 1]
            c1 = X[i, 2] * X[j, 0] - X[i, 0] * X[j, 2]
            c2 = X[i, 0] * X[j, 1] - X[i, 1] * X[j, 0]
            for k in range(j + 1, N):
                d = abs(c0 * X[k, 0] + c1 * X[k, 1] + c2 * X[k, 2])
                count += 1
                if d < best:
                    best = d
                    arg[0] = i
                    arg[1] = j
                    arg[2] = k
                if d <= thresh:
                    if ncol < cap:
                        out_idx[ncol, 0] = i
                        out_idx[ncol, 1] = j
                        out_idx[ncol, 2] = k
                        out_val[ncol] = d
                    ncol += 1
    return best, arg, count, out_idx, out_val, ncol


@njit(cache=True)
def alpha3_through(X, i, thresh, cap):
    """Triples of rows that contain row ``i``."""
    N = X.shape[0]
    best = np.inf
    arg = np.full(3, -1, np.int64)
    out_idx = np.empty((cap, 3), np.int64)
    out_val = np.empty(cap)
    ncol = 0
    count = 0
    for j in range(N):
        if j == i:
            continue
        c0 = X[i, 1] * X[j, 2] - X[i, 2] * X[j, 1]
        c1 = X[i, 2] * X[j, 0] - X[i, 0] * X[j, 2]
        c2 = X[i, 0] * X[j, 1] - X[i, 1] * X[j, 0]
        for k in range(j + 1, N):
            if k == i:
                continue
            d = abs(c0 * X[k, 0] + c1 * X[k, 1] + c2 * X[k, 2])
            count += 1
            if d < best:
                best = d
                arg[0] = i
                arg[1] = j
                arg[2] = k
            if d <= thresh:
                if ncol < cap:
                    out_idx[ncol, 0] = i
                    out_idx[ncol, 1] = j
                    out_idx[ncol, 2] = k
                    out_val[ncol] = d
                ncol += 1
    return best, arg, count, out_idx, out_val, ncol


@njit(cache=True)
def alpha_generic(X, n):
    N = X.shape[0]
    best = np.inf
    arg = np.arange(n)
    idx = np.arange(n)
    M = np.empty((n, n))
    count = 0
    while True:
        for r in range(n):
            M[r] = X[idx[r]]
        d = abs(np.linalg.det(M))
        count += 1
        if d < best:
            best = d
            arg[:] = idx
        # next combination in lexicographic order
        r = n - 1
        while r >= 0 and idx[r] == N - n + r:
            r -= 1
        if r < 0:
            break
        idx[r] += 1
        for s in range(r + 1, n):
            idx[s] = idx[s - 1] + 1
    return best, arg, count


@njit(cache=True)
def beta3(normals, fv, thresh, cap):
    F = normals.shape[0]
    M = F // 2
    best = np.inf
    arg = np.full(3, -1, np.int64)
    out_idx = np.empty((cap, 3), np.int64)
    out_val = np.empty(cap)
    ncol = 0
    count = 0
    for a in range(M):
        for o2 in range(a + 1, M):
            for sb in range(2):
                b = o2 + sb * M
                if not _disjoint3(fv, a, b):
                    continue
                c0 = normals[a, 1] * normals[b, 2] - normals[a, 2] * normals[b, 1]
                c1 = normals[a, 2] * normals[b, 0] - normals[a, 0] * normals[b, 2]
                c2 = normals[a, 0] * normals[b, 1] - normals[a, 1] * normals[b, 0]
                for o3 in range(o2 + 1, M):
                    for sc in range(2):
                        c = o3 + sc * M
                        if not (_disjoint3(fv, a, c) and _disjoint3(fv, b, c)):
                            continue
                        d = abs(c0 * normals[c, 0] + c1 * normals[c, 1] + c2 * normals[c, 2])
                        count += 1
                        if d < best:
                            best = d
                            arg[0] = a
                            arg[1] = b
                            arg[2] = c
                        if d <= thresh:
                            if ncol < cap:
                                out_idx[ncol, 0] = a
                                out_idx[ncol, 1] = b
                                out_idx[ncol, 2] = c
                                out_val[ncol] = d
                            ncol += 1
    return best, arg, count, out_idx, out_val, ncol


@njit(cache=True)
def beta3_through(normals, fv, members, thresh, cap):
    """Admissible triples containing at least one facet from ``members``.

    Each triple may be visited several times (once per member it contains and
    per global sign); the minimum is unaffected and callers dedupe collected
    tuples by key. Disjointness is tested only for triples whose determinant
    could matter (below the running minimum or ``thresh``), so ``count`` is
    the number of such candidates rather than of all admissible triples.
    """
    F = normals.shape[0]
    M = F // 2
    best = np.inf
    arg = np.full(3, -1, np.int64)
    out_idx = np.empty((cap, 3), np.int64)
    out_val = np.empty(cap)
    ncol = 0
    count = 0
    for t in range(members.shape[0]):
        a = members[t]
        oa = a % M
        for b in range(F):
            ob = b % M
            if ob == oa or not _disjoint3(fv, a, b):
                continue
            c0 = normals[a, 1] * normals[b, 2] - normals[a, 2] * normals[b, 1]
            c1 = normals[a, 2] * normals[b, 0] - normals[a, 0] * normals[b, 2]
            c2 = normals[a, 0] * normals[b, 1] - normals[a, 1] * normals[b, 0]
            for c in range(b + 1, F):
                d = abs(c0 * normals[c, 0] + c1 * normals[c, 1] + c2 * normals[c, 2])
                if d >= best and d > thresh:
                    continue
                oc = c % M
                if oc == oa or oc == ob:
                    continue
                if not (_disjoint3(fv, a, c) and _disjoint3(fv, b, c)):
                    continue
                count += 1
                if d < best:
                    best = d
                    arg[0] = a
                    arg[1] = b
                    arg[2] = c
                if d <= thresh:
                    if ncol < cap:
                        out_idx[ncol, 0] = a
                        out_idx[ncol, 1] = b
                        out_idx[ncol, 2] = c
                        out_val[ncol] = d
                    ncol += 1
    return best, arg, count, out_idx, out_val, ncol


@njit(cache=True)
def beta_generic(normals, fv, n):
    """Depth-first enumeration with pairwise-disjointness pruning, any n."""
    F = normals.shape[0]
    M = F // 2
    best = np.inf
    arg = np.full(n, -1, np.int64)
    chosen = np.empty(n, np.int64)
    code = np.empty(n, np.int64)    # code = orbit * 2 + sign
    A = np.empty((n, n))
    count = 0
    depth = 0
    code[0] = -2
    while depth >= 0:
        if depth == 0:
            code[0] += 2                  # first member always from [0, M)
        else:
            code[depth] += 1
        if code[depth] >= 2 * M:
            depth -= 1
            continue
        f = code[depth] // 2 + (code[depth] % 2) * M
        ok = True
        for e in range(depth):
            if not _disjoint(fv, chosen[e], f):
                ok = False
                break
        if not ok:
            continue
        chosen[depth] = f
        if depth == n - 1:
            for r in range(n):
                A[r] = normals[chosen[r]]
            d = abs(np.linalg.det(A))
            count += 1
            if d < best:
                best = d
                arg[:] = chosen
        else:
            depth += 1
            # next member starts at the following orbit
            code[depth] = (code[depth - 1] // 2 + 1) * 2 - 1
    return best, arg, count

"""Numba kernel backend. Same contracts as `_numpy`, compiled loops.

No fastmath: associativity rewrites would break the bit-level agreement
with the numpy backend on the tree accumulators.
"""

import numba as nb
import numpy as np

_jit = {"cache": True, "nogil": True}


@nb.njit(**_jit)
def tree_cumsum(order, parent, level_starts, contrib):
    out = np.zeros(contrib.shape[0], dtype=np.complex128)
    for i in range(order.shape[0]):
        v = order[i]
        p = parent[v]
        if p >= 0:
            out[v] = out[p] + contrib[v]
    return out


@nb.njit(**_jit)
def tree_cumprod(order, parent, level_starts, factors):
    out = np.ones(factors.shape[0], dtype=np.complex128)
    for i in range(order.shape[0]):
        v = order[i]
        p = parent[v]
        if p >= 0:
            out[v] = out[p] * factors[v]
    return out


@nb.njit(**_jit)
def cr_residuals(values, quads, rho):
    n = quads.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for q in range(n):
        x = values[quads[q, 0]]
        y = values[quads[q, 1]]
        xp = values[quads[q, 2]]
        yp = values[quads[q, 3]]
        out[q] = yp - y - 1j * rho[q] * (xp - x)
    return out


@nb.njit(**_jit)
def edge_residuals(f, fprime, pos, edges):
    n = edges.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for e in range(n):
        a = edges[e, 0]
        b = edges[e, 1]
        out[e] = f[b] - f[a] - 0.5 * (fprime[a] + fprime[b]) * (pos[b] - pos[a])
    return out


@nb.njit(**_jit)
def path_integral(f, pos, ids):
    total = 0.0 + 0.0j
    for i in range(ids.shape[0] - 1):
        a = ids[i]
        b = ids[i + 1]
        total += 0.5 * (f[a] + f[b]) * (pos[b] - pos[a])
    return total

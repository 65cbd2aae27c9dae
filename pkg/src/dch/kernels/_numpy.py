"""Pure numpy kernel backend.

Tree accumulators run level by level so every assignment reads values
settled in an earlier level; that keeps the arithmetic identical to the
sequential numba loops.
"""

import numpy as np


def tree_cumsum(order, parent, level_starts, contrib):
    out = np.zeros(contrib.shape[0], dtype=np.complex128)
    for a, b in zip(level_starts[:-1], level_starts[1:]):
        idx = order[a:b]
        p = parent[idx]
        if p[0] < 0:
            continue
        out[idx] = out[p] + contrib[idx]
    return out


def tree_cumprod(order, parent, level_starts, factors):
    out = np.ones(factors.shape[0], dtype=np.complex128)
    for a, b in zip(level_starts[:-1], level_starts[1:]):
        idx = order[a:b]
        p = parent[idx]
        if p[0] < 0:
            continue
        out[idx] = out[p] * factors[idx]
    return out


def cr_residuals(values, quads, rho):
    x = values[quads[:, 0]]
    y = values[quads[:, 1]]
    xp = values[quads[:, 2]]
    yp = values[quads[:, 3]]
    return yp - y - 1j * rho * (xp - x)


def edge_residuals(f, fprime, pos, edges):
    a = edges[:, 0]
    b = edges[:, 1]
    return f[b] - f[a] - 0.5 * (fprime[a] + fprime[b]) * (pos[b] - pos[a])


def path_integral(f, pos, ids):
    a = ids[:-1]
    b = ids[1:]
    return complex(np.add.reduce(0.5 * (f[a] + f[b]) * (pos[b] - pos[a])))

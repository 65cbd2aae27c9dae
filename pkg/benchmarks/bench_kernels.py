"""Compare the numba and numpy kernel backends on a large rhombic patch.

Usage:
    python benchmarks/bench_kernels.py [--rows 256] [--cols 256] [--repeats 5]

Each kernel is warmed once per backend (the first numba call pays the JIT
compile), then timed over the best of --repeats runs. Results agree across
backends to the last couple of ulps; the table reports the max difference.
"""

import argparse
import math
import time

import numpy as np

from dch import build_rect_lattice
from dch.kernels import _numba, _numpy


def best_of(repeats, fn, *args):
    out = None
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=256)
    ap.add_argument("--cols", type=int, default=256)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    cmap = build_rect_lattice(1.0, math.pi / 3, args.rows, args.cols)
    order, parent, level_starts = cmap.bfs
    rng = np.random.default_rng(0)
    nv = cmap.vertex_count
    contrib = rng.standard_normal(nv) + 1j * rng.standard_normal(nv)
    factors = np.exp(contrib / (np.abs(contrib).max() * 4))
    f = rng.standard_normal(nv) + 1j * rng.standard_normal(nv)
    fp = rng.standard_normal(nv) + 1j * rng.standard_normal(nv)
    path = order[: nv // 2].astype(np.int64)

    cases = [
        ("tree_cumsum", lambda impl: impl.tree_cumsum(
            order, parent, level_starts, contrib)),
        ("tree_cumprod", lambda impl: impl.tree_cumprod(
            order, parent, level_starts, factors)),
        ("cr_residuals", lambda impl: impl.cr_residuals(
            f, cmap.quads, cmap.rho)),
        ("edge_residuals", lambda impl: impl.edge_residuals(
            f, fp, cmap.positions, cmap.edges)),
        ("path_integral", lambda impl: impl.path_integral(
            f, cmap.positions, path)),
    ]

    print(f"map: {args.rows}x{args.cols} quads, {nv} vertices, "
          f"{len(cmap.edges)} edges")
    header = f"{'kernel':<15}{'numba':>12}{'numpy':>12}{'speedup':>9}{'max diff':>11}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        call(_numba)  # JIT warmup
        t_nb, out_nb = best_of(args.repeats, call, _numba)
        t_np, out_np = best_of(args.repeats, call, _numpy)
        diff = float(np.max(np.abs(np.atleast_1d(out_nb - out_np))))
        print(f"{name:<15}{t_nb * 1e3:>10.2f}ms{t_np * 1e3:>10.2f}ms"
              f"{t_np / t_nb:>8.1f}x{diff:>11.2e}")


if __name__ == "__main__":
    main()

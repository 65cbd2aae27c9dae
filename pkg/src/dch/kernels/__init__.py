"""Hot numerical kernels with two interchangeable backends.

The numba backend JIT-compiles the loops, the numpy backend vectorises the
same arithmetic level by level. Selection order: the ``DCH_KERNELS``
environment variable (``numba``, ``numpy`` or ``auto``), falling back to
numba whenever it imports, else numpy. `set_backend` overrides at runtime,
mainly for tests and benchmarks.

Each backend is deterministic on its own, and the additive tree
accumulator (`tree_cumsum`) is bit-for-bit equal across backends.
Products and reductions (`tree_cumprod`, `path_integral`) may differ in
the last couple of ulps: the vectorised complex multiply can contract
with FMA where the scalar loop does not.
"""

from __future__ import annotations

import os

from ..errors import ValidationError

_IMPL = None
_NAME = None


def _load(name: str):
    if name == "numba":
        from . import _numba as impl
    else:
        from . import _numpy as impl
    return impl


def _resolve():
    global _IMPL, _NAME
    if _IMPL is not None:
        return _IMPL
    choice = os.environ.get("DCH_KERNELS", "auto").strip().lower() or "auto"
    if choice not in ("auto", "numba", "numpy"):
        raise ValidationError(
            f"DCH_KERNELS must be 'numba', 'numpy' or 'auto', got {choice!r}"
        )
    if choice == "numpy":
        _IMPL, _NAME = _load("numpy"), "numpy"
    elif choice == "numba":
        _IMPL, _NAME = _load("numba"), "numba"
    else:
        try:
            _IMPL, _NAME = _load("numba"), "numba"
        except ImportError:
            _IMPL, _NAME = _load("numpy"), "numpy"
    return _IMPL


def set_backend(name: str | None = None) -> str:
    """Force a backend by name, or reset to environment-driven selection."""
    global _IMPL, _NAME
    if name is None:
        _IMPL = _NAME = None
        _resolve()
        return _NAME
    name = name.strip().lower()
    if name not in ("numba", "numpy"):
        raise ValidationError(f"unknown kernel backend {name!r}")
    _IMPL, _NAME = _load(name), name
    return _NAME


def backend_name() -> str:
    _resolve()
    return _NAME


def tree_cumsum(order, parent, level_starts, contrib):
    """Accumulate contrib along BFS tree edges: out[v] = out[parent] + contrib[v]."""
    return _resolve().tree_cumsum(order, parent, level_starts, contrib)


def tree_cumprod(order, parent, level_starts, factors):
    """Multiply factors along BFS tree edges: out[v] = out[parent] * factors[v]."""
    return _resolve().tree_cumprod(order, parent, level_starts, factors)


def cr_residuals(values, quads, rho):
    """Per-quad residual f(y') - f(y) - i rho (f(x') - f(x))."""
    return _resolve().cr_residuals(values, quads, rho)


def edge_residuals(f, fprime, pos, edges):
    """Per-edge trapezoid defect f(b) - f(a) - (f'(a)+f'(b))/2 (Z(b)-Z(a))."""
    return _resolve().edge_residuals(f, fprime, pos, edges)


def path_integral(f, pos, ids):
    """Trapezoid integral of f dZ along consecutive vertex ids."""
    return _resolve().path_integral(f, pos, ids)

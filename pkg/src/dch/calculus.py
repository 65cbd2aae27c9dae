"""Discrete integration, monomials, exponentials and derivation.

Integration is the trapezoid pairing along quad-graph edges,

    int_(a,b) f dZ = (f(a) + f(b)) / 2 * (Z(b) - Z(a)),

which is path independent exactly when f is holomorphic: the loop around
one face equals -(Z(x') - Z(x)) / 2 times the face's Cauchy-Riemann
residual. Monomials are built by the factor-k ladder Z^{:0:} = 1,
Z^{:k:} = k * primitive(Z^{:k-1:}), the exponential either as a rational
product over a path or as a truncated monomial series, and the derivative
by dualising a primitive of the dual, with the biconstant ambiguity fixed
by a conductance-weighted mean of face quotients around the origin.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import kernels
from .errors import (
    NotHolomorphicError,
    PoleProximityError,
    RatioMismatchError,
    ValidationError,
)
from .holomorphy import VertexFunction, cr_residuals, epsilon, is_holomorphic
from .lattice import GAMMA, CriticalMap, PathRef, as_path


class SeriesDivergenceWarning(UserWarning):
    """Partial sums were requested outside the series' convergence disc."""


def _path_ids(f, path):
    if isinstance(path, PathRef):
        if path.cmap is not f.cmap and path.cmap != f.cmap:
            raise ValidationError("path belongs to a different map")
        return np.asarray(path.ids, dtype=np.int64)
    return np.asarray(as_path(f.cmap, path).ids, dtype=np.int64)


def integrate_path(f: VertexFunction, path) -> complex:
    """Trapezoid integral of f dZ along a quad-graph walk."""
    ids = _path_ids(f, path)
    if ids.size < 2:
        return 0j
    return complex(kernels.path_integral(f.values, f.cmap.positions, ids))


def integrate_lambda_edge(f: VertexFunction, a: int, b: int) -> complex:
    """Integral along a diagonal (a, b) of some face, as the four-point mean

        (f(x) + f(y) + f(x') + f(y')) / 4 * (Z(b) - Z(a)).

    Equals the average of the two quad-graph routes around the face for any
    f, by the parallelogram midpoint identity.
    """
    cmap = f.cmap
    q = cmap.diagonal_quad(int(a), int(b))
    if q is None:
        raise ValidationError(f"({a}, {b}) is not a diagonal of any face")
    corners = cmap.quads[q]
    mean = f.values[corners].sum() / 4.0
    return complex(mean * (cmap.positions[b] - cmap.positions[a]))


def loop_integral(f: VertexFunction, quad: int) -> complex:
    """Integral around one face, counterclockwise."""
    x, y, xp, yp = f.cmap.quads[quad]
    ids = np.asarray([x, y, xp, yp, x], dtype=np.int64)
    return complex(kernels.path_integral(f.values, f.cmap.positions, ids))


def edge_increments(f: VertexFunction) -> np.ndarray:
    """(f(a)+f(b))/2 * (Z(b)-Z(a)) over the map's unique edges."""
    e = f.cmap.edges
    z = f.cmap.positions
    v = f.values
    return 0.5 * (v[e[:, 0]] + v[e[:, 1]]) * (z[e[:, 1]] - z[e[:, 0]])


def primitive(f: VertexFunction, check: bool = True, tol: float = 1e-9) -> VertexFunction:
    """Integral of f dZ from the origin, along the BFS tree.

    Well defined only for holomorphic f; with check on, the per-face loop
    integrals (proportional to the CR residuals) must stay below
    tol * max(1, sup |f|).
    """
    cmap = f.cmap
    if check:
        res = cr_residuals(f)
        z = cmap.positions
        loops = 0.5 * np.abs(z[cmap.quads[:, 2]] - z[cmap.quads[:, 0]]) * np.abs(res)
        worst = float(loops.max()) if loops.size else 0.0
        if worst > tol * f.scale:
            raise NotHolomorphicError(worst, tol * f.scale)
    order, parent, level_starts = cmap.bfs
    z = cmap.positions
    v = f.values
    contrib = np.zeros(cmap.vertex_count, dtype=np.complex128)
    idx = np.flatnonzero(parent >= 0)
    contrib[idx] = 0.5 * (v[parent[idx]] + v[idx]) * (z[idx] - z[parent[idx]])
    out = kernels.tree_cumsum(order, parent, level_starts, contrib)
    return VertexFunction(cmap, out)


def monomial(cmap: CriticalMap, k: int) -> VertexFunction:
    """Discrete monomial Z^{:k:}: the factor-k primitive ladder from 1.

    Z^{:0:} = 1, Z^{:1:} = Z - Z(origin) exactly, Z^{:2:} = (Z - Z(origin))^2
    pointwise, and from there the values pick up lattice corrections.
    Cached per map.
    """
    k = int(k)
    if k < 0:
        raise ValidationError("monomial degree must be nonnegative")
    cache = cmap._cache.setdefault("monomials", {})
    if k not in cache:
        top = max(cache) if cache else -1
        if top < 0:
            cache[0] = VertexFunction.constant(cmap, 1.0)
            top = 0
        for j in range(top + 1, k + 1):
            cache[j] = j * primitive(cache[j - 1], check=False)
    return cache[k]


def dual(f: VertexFunction) -> VertexFunction:
    """f-dagger: conjugate and flip sign on gamma_star vertices."""
    sign = np.where(f.cmap.colors == GAMMA, 1.0, -1.0)
    return VertexFunction(f.cmap, sign * np.conj(f.values))


def derive_duffin(f: VertexFunction, check: bool = True, tol: float = 1e-9) -> VertexFunction:
    """Discrete derivative: (4 / delta^2) * dual(primitive(dual(f))) + lambda * epsilon.

    The biconstant coefficient lambda is the conductance-weighted mean of
    the face difference quotients around the origin, taken along each
    face's diagonal of the color opposite the origin (weight rho for a
    gamma origin, 1/rho for a gamma_star one). The resulting g satisfies
    d f = g dZ edgewise.
    """
    cmap = f.cmap
    if check:
        rep = is_holomorphic(f, tol)
        if not rep.ok:
            raise NotHolomorphicError(rep.max_residual, tol * rep.scale)
    g = dual(primitive(dual(f), check=False))
    base = (4.0 / cmap.delta**2) * g

    o = cmap.origin
    quads_idx, _ = cmap.incident_quads(o)
    if quads_idx.size == 0:
        raise ValidationError("origin is not incident to any face")
    z = cmap.positions
    v = f.values
    num = 0j
    den = 0.0
    for q in quads_idx:
        x, y, xp, yp = cmap.quads[q]
        if cmap.colors[o] == GAMMA:
            fd = (v[yp] - v[y]) / (z[yp] - z[y])
            w = float(cmap.rho[q])
        else:
            fd = (v[xp] - v[x]) / (z[xp] - z[x])
            w = 1.0 / float(cmap.rho[q])
        num += w * fd
        den += w
    lam = num / den
    return base + lam * epsilon(cmap)


def derivative_edge_residuals(f: VertexFunction, fprime: VertexFunction) -> np.ndarray:
    """Per-edge defect of d f = f' dZ under the trapezoid pairing."""
    cmap = f.cmap
    return kernels.edge_residuals(f.values, fprime.values, cmap.positions, cmap.edges)


# -- exponentials --------------------------------------------------------------


def _pole_guard(cmap: CriticalMap, lam: complex, floor: float = 1e-12):
    e = cmap.edges
    d = cmap.positions[e[:, 1]] - cmap.positions[e[:, 0]]
    for dd in (d, -d):
        mags = np.abs(1.0 - lam * dd / 2.0)
        k = int(np.argmin(mags))
        if mags[k] < floor:
            raise PoleProximityError(lam, complex(dd[k]), float(mags[k]))


def exp_product(cmap: CriticalMap, lam) -> VertexFunction:
    """Discrete exponential: product of (1 + lam dZ/2) / (1 - lam dZ/2) over
    a path's edges from the origin. Path independent, so the BFS tree serves.

    Rational in lam with poles at 2 / (delta e^{i theta}) for each edge
    direction theta; parameters closer than 1e-12 to a pole are rejected.
    """
    lam = complex(lam)
    if lam == 0:
        return VertexFunction.constant(cmap, 1.0)
    _pole_guard(cmap, lam)
    order, parent, level_starts = cmap.bfs
    z = cmap.positions
    factors = np.ones(cmap.vertex_count, dtype=np.complex128)
    idx = np.flatnonzero(parent >= 0)
    step = lam * (z[idx] - z[parent[idx]]) / 2.0
    factors[idx] = (1.0 + step) / (1.0 - step)
    out = kernels.tree_cumprod(order, parent, level_starts, factors)
    return VertexFunction(cmap, out)


def exp_series_partial(cmap: CriticalMap, lam, degree: int) -> VertexFunction:
    """Partial sum sum_{k<=degree} lam^k Z^{:k:} / k!.

    Warns instead of failing when |lam| >= 2/delta, where the series leaves
    its convergence disc and partial sums are only an asymptotic gesture.
    """
    lam = complex(lam)
    degree = int(degree)
    if degree < 0:
        raise ValidationError("series degree must be nonnegative")
    if abs(lam) >= 2.0 / cmap.delta:
        warnings.warn(
            f"|lam| = {abs(lam):.6g} is outside the convergence disc "
            f"(radius {2.0 / cmap.delta:.6g}); partial sums may diverge",
            SeriesDivergenceWarning,
            stacklevel=2,
        )
    total = np.zeros(cmap.vertex_count, dtype=np.complex128)
    coef = 1.0 + 0j
    for k in range(degree + 1):
        if k > 0:
            coef *= lam / k
        total += coef * monomial(cmap, k).values
    return VertexFunction(cmap, total)


# -- face functions -------------------------------------------------------------


class FaceFunction:
    """Complex-valued function on the faces of a fixed map."""

    __slots__ = ("cmap", "values")

    def __init__(self, cmap: CriticalMap, values):
        vals = np.array(values, dtype=np.complex128)
        if vals.shape != (cmap.quad_count,):
            raise ValidationError(
                f"expected {cmap.quad_count} face values, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        self.cmap = cmap
        self.values = vals

    def __call__(self, quad: int) -> complex:
        return complex(self.values[quad])

    def __repr__(self):
        return f"FaceFunction({self.cmap!r}, sup={np.abs(self.values).max():.6g})"


def face_derivative(f: VertexFunction, tol: float = 1e-10) -> FaceFunction:
    """Per-face difference quotient along the diagonals.

    For holomorphic f the gamma quotient (f(x')-f(x))/(Z(x')-Z(x)) and the
    gamma_star quotient agree; their mismatch beyond tol * scale means f
    was not holomorphic and raises. The stored value is their mean.
    """
    cmap = f.cmap
    z = cmap.positions
    v = f.values
    x, y, xp, yp = (cmap.quads[:, i] for i in range(4))
    qg = (v[xp] - v[x]) / (z[xp] - z[x])
    qs = (v[yp] - v[y]) / (z[yp] - z[y])
    scale = max(1.0, float(np.abs(qg).max()), float(np.abs(qs).max()))
    worst = float(np.abs(qg - qs).max()) if qg.size else 0.0
    if worst > tol * scale:
        raise RatioMismatchError(worst, tol * scale)
    return FaceFunction(cmap, (qg + qs) / 2.0)


def morera_residual(a: FaceFunction, vertex: int) -> complex:
    """Fan sum of a * (opposite diagonal) around an interior vertex.

    Zero for face derivatives of holomorphic functions and for constants;
    the telescoping only closes on interior vertices, boundary fans are
    rejected.
    """
    cmap = a.cmap
    vertex = int(vertex)
    if cmap.boundary_vertex_mask[vertex]:
        raise ValidationError(f"vertex {vertex} is on the boundary, fan does not close")
    quads_idx, corners = cmap.incident_quads(vertex)
    z = cmap.positions
    total = 0j
    for q, c in zip(quads_idx, corners):
        row = cmap.quads[q]
        total += a.values[q] * (z[row[(c + 3) % 4]] - z[row[(c + 1) % 4]])
    return complex(total)

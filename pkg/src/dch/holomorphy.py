"""Vertex functions and the discrete Cauchy-Riemann equation.

A function on a quad-map lives on all vertices of both colors. It is
discretely holomorphic when on every face (x, y, x', y')

    f(y') - f(y) = i rho (f(x') - f(x)),

with rho the face's diagonal ratio. The residual of that identity is the
basic local quantity everything else builds on.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import lsqr, spsolve

from . import kernels
from .errors import BoundaryDataError, ValidationError
from .lattice import GAMMA, GAMMA_STAR, CriticalMap


class VertexFunction:
    """Complex-valued function on the vertices of a fixed map."""

    __slots__ = ("cmap", "values")

    def __init__(self, cmap: CriticalMap, values):
        vals = np.array(values, dtype=np.complex128)
        if vals.shape != (cmap.vertex_count,):
            raise ValidationError(
                f"expected {cmap.vertex_count} values, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        self.cmap = cmap
        self.values = vals

    @classmethod
    def from_callable(cls, cmap: CriticalMap, fn) -> "VertexFunction":
        return cls(cmap, [fn(z) for z in cmap.positions])

    @classmethod
    def constant(cls, cmap: CriticalMap, value) -> "VertexFunction":
        return cls(cmap, np.full(cmap.vertex_count, complex(value)))

    def __call__(self, vertex: int) -> complex:
        return complex(self.values[vertex])

    def _check_same_map(self, other):
        if self.cmap is not other.cmap and self.cmap != other.cmap:
            raise ValidationError("functions live on different maps")

    def __add__(self, other):
        if isinstance(other, VertexFunction):
            self._check_same_map(other)
            return VertexFunction(self.cmap, self.values + other.values)
        return VertexFunction(self.cmap, self.values + complex(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, VertexFunction):
            self._check_same_map(other)
            return VertexFunction(self.cmap, self.values - other.values)
        return VertexFunction(self.cmap, self.values - complex(other))

    def __rsub__(self, other):
        return VertexFunction(self.cmap, complex(other) - self.values)

    def __mul__(self, other):
        if isinstance(other, VertexFunction):
            self._check_same_map(other)
            return VertexFunction(self.cmap, self.values * other.values)
        return VertexFunction(self.cmap, self.values * complex(other))

    __rmul__ = __mul__

    def __neg__(self):
        return VertexFunction(self.cmap, -self.values)

    def conj(self) -> "VertexFunction":
        return VertexFunction(self.cmap, np.conj(self.values))

    @property
    def scale(self) -> float:
        """max(1, sup |f|), the reference for relative tolerances."""
        return max(1.0, float(np.abs(self.values).max()))

    def max_abs_diff(self, other: "VertexFunction") -> float:
        self._check_same_map(other)
        return float(np.abs(self.values - other.values).max())

    def __repr__(self):
        return f"VertexFunction({self.cmap!r}, sup={np.abs(self.values).max():.6g})"

    # csv format: header vertex_id,re,im; one row per vertex

    def to_csv(self, path) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex_id", "re", "im"])
        for i, v in enumerate(self.values):
            w.writerow([i, f"{v.real:.17g}", f"{v.imag:.17g}"])
        from .lattice import write_text_atomic

        write_text_atomic(path, buf.getvalue())

    @classmethod
    def from_csv(cls, cmap: CriticalMap, path) -> "VertexFunction":
        rows = read_value_csv(path)
        nv = cmap.vertex_count
        missing = set(range(nv)) - set(rows)
        extra = set(rows) - set(range(nv))
        if missing or extra:
            raise ValidationError(
                f"csv must cover vertex ids 0..{nv - 1} exactly "
                f"(missing {sorted(missing)[:5]}, extra {sorted(extra)[:5]})"
            )
        vals = np.zeros(nv, dtype=np.complex128)
        for i, v in rows.items():
            vals[i] = v
        return cls(cmap, vals)


def read_value_csv(path) -> dict:
    """Read a vertex_id,re,im csv into {id: complex}. Ids may be a subset."""
    out = {}
    with open(os.fspath(path), "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["vertex_id", "re", "im"]:
            raise ValidationError(
                f"csv must start with header vertex_id,re,im, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vid = int(row[0])
                val = complex(float(row[1]), float(row[2]))
            except (ValueError, IndexError) as exc:
                raise ValidationError(f"bad csv row {lineno}: {row}") from exc
            if vid in out:
                raise ValidationError(f"duplicate vertex id {vid} in csv")
            out[vid] = val
    return out


def coordinate(cmap: CriticalMap) -> VertexFunction:
    """The embedding Z itself as a vertex function."""
    return VertexFunction(cmap, cmap.positions)


def epsilon(cmap: CriticalMap) -> VertexFunction:
    """The biconstant: +1 on gamma vertices, -1 on gamma_star ones."""
    return VertexFunction(cmap, np.where(cmap.colors == GAMMA, 1.0, -1.0))


# -- residuals ---------------------------------------------------------------


def cr_residual(f: VertexFunction, quad: int) -> complex:
    """f(y') - f(y) - i rho (f(x') - f(x)) on one face."""
    cmap = f.cmap
    x, y, xp, yp = cmap.quads[quad]
    v = f.values
    return complex(v[yp] - v[y] - 1j * cmap.rho[quad] * (v[xp] - v[x]))


def cr_residuals(f: VertexFunction) -> np.ndarray:
    """All face residuals at once."""
    return kernels.cr_residuals(f.values, f.cmap.quads, f.cmap.rho)


@dataclass
class HolomorphyReport:
    ok: bool
    max_residual: float
    scale: float
    tol: float

    def __bool__(self):
        return self.ok


def is_holomorphic(f: VertexFunction, tol: float = 1e-9) -> HolomorphyReport:
    """Check all faces; the tolerance is relative to max(1, sup |f|)."""
    res = cr_residuals(f)
    worst = float(np.abs(res).max()) if res.size else 0.0
    scale = f.scale
    return HolomorphyReport(worst <= tol * scale, worst, scale, tol)


# -- linear structure ---------------------------------------------------------


def cr_matrix(cmap: CriticalMap, dense: bool | None = None):
    """The (Q x V) linear system whose kernel is the holomorphic functions."""
    q = cmap.quad_count
    nv = cmap.vertex_count
    rows = np.repeat(np.arange(q), 4)
    cols = cmap.quads.ravel()
    coef = np.empty((q, 4), dtype=np.complex128)
    coef[:, 0] = 1j * cmap.rho
    coef[:, 1] = -1.0
    coef[:, 2] = -1j * cmap.rho
    coef[:, 3] = 1.0
    mat = sparse.coo_matrix((coef.ravel(), (rows, cols)), shape=(q, nv)).tocsr()
    if dense is None:
        dense = nv <= 2000
    return mat.toarray() if dense else mat


def canonical_pins(cmap: CriticalMap) -> np.ndarray:
    """Gamma_star boundary vertices plus the origin, ascending.

    Pinning values there determines a holomorphic function on the simply
    connected maps the builders produce: the count matches the dimension
    |boundary|/2 + 1 of the solution space.
    """
    mask = cmap.boundary_vertex_mask & (cmap.colors == GAMMA_STAR)
    pins = set(np.flatnonzero(mask).tolist())
    pins.add(cmap.origin)
    return np.asarray(sorted(pins), dtype=np.int64)


def solve_boundary(cmap: CriticalMap, boundary, tol: float = 1e-10) -> VertexFunction:
    """Extend pinned values to a discretely holomorphic function.

    boundary maps vertex ids to complex values. The remaining values solve
    the Cauchy-Riemann system in the least-squares sense; afterwards every
    face residual must be below tol * max(1, sup |f|), so inconsistent
    over-determined data raises instead of being averaged away silently.
    """
    if not boundary:
        raise ValidationError("no boundary values supplied")
    nv = cmap.vertex_count
    pinned = np.asarray(sorted(boundary), dtype=np.int64)
    if pinned[0] < 0 or pinned[-1] >= nv:
        raise ValidationError("boundary vertex id out of range")
    pin_vals = np.array([complex(boundary[int(i)]) for i in pinned])
    free = np.setdiff1d(np.arange(nv), pinned)
    if free.size == 0:
        values = np.zeros(nv, dtype=np.complex128)
        values[pinned] = pin_vals
        return _checked(cmap, values, tol)

    mat = cr_matrix(cmap, dense=nv <= 2000)
    rhs_rows = cmap.quad_count
    if rhs_rows < free.size:
        raise ValidationError(
            f"{len(boundary)} pinned values leave {free.size} unknowns but only "
            f"{rhs_rows} equations; add pins (canonical choice: gamma_star "
            f"boundary plus origin)"
        )
    if isinstance(mat, np.ndarray):
        a = mat[:, free]
        b = -mat[:, pinned] @ pin_vals
        sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
        if rank < free.size:
            raise ValidationError(
                f"boundary data does not determine the function: system rank "
                f"{rank} < {free.size} unknowns"
            )
    else:
        a = mat[:, free]
        b = -(mat[:, pinned] @ pin_vals)
        if a.shape[0] == a.shape[1]:
            sol = spsolve(a.tocsc(), b)
        else:
            sol = lsqr(a, b, atol=1e-14, btol=1e-14, iter_lim=8 * a.shape[1])[0]
    values = np.zeros(nv, dtype=np.complex128)
    values[pinned] = pin_vals
    values[free] = sol
    return _checked(cmap, values, tol)


def _checked(cmap, values, tol):
    f = VertexFunction(cmap, values)
    if not np.all(np.isfinite(values.view(np.float64))):
        raise BoundaryDataError(float("inf"), tol)
    rep = is_holomorphic(f, tol)
    if not rep.ok:
        raise BoundaryDataError(rep.max_residual, tol * rep.scale)
    return f


def dimension_of_solution_space(cmap: CriticalMap, rtol: float = 1e-9) -> int:
    """Nullity of the Cauchy-Riemann system, by dense SVD.

    For a simply connected map this equals |boundary|/2 + 1. Dense on
    purpose: rank detection needs singular values, so very large maps are
    rejected rather than silently mis-ranked.
    """
    if cmap.vertex_count > 4000:
        raise ValidationError(
            "dimension count uses a dense SVD; map too large, use the "
            "boundary formula |boundary|/2 + 1 instead"
        )
    mat = cr_matrix(cmap, dense=True)
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return cmap.vertex_count
    return int(cmap.vertex_count - np.count_nonzero(sv > rtol * sv[0]))


def boundary_dimension_formula(cmap: CriticalMap) -> int:
    """|boundary vertices| / 2 + 1."""
    return int(len(cmap.boundary_vertices) // 2 + 1)


def random_holomorphic(cmap: CriticalMap, rng=None, scale: float = 1.0) -> VertexFunction:
    """Sample a holomorphic function from random canonical boundary data."""
    rng = np.random.default_rng(rng)
    pins = canonical_pins(cmap)
    vals = scale * (rng.standard_normal(pins.size) + 1j * rng.standard_normal(pins.size))
    return solve_boundary(cmap, dict(zip(pins.tolist(), vals.tolist())))

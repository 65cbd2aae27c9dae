"""Critical rhombic quad-maps.

A map is a planar, simply connected quad-graph whose faces are rhombi
(lozenges) of a common side length delta. Vertices are bicolored: the
``gamma`` vertices and the ``gamma_star`` vertices each span one of the two
dual graphs whose superposition the quad-graph is. Every face is stored as
a counterclockwise quadruple ``(x, y, x', y')`` with ``x, x'`` gamma and
``y, y'`` gamma_star, so the diagonals are ``(x, x')`` and ``(y, y')`` and
the diagonal ratio ``rho = |Z(y') - Z(y)| / |Z(x') - Z(x)|`` is the
conductance attached to the face.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

GAMMA = 0
GAMMA_STAR = 1

_COLOR_NAMES = {GAMMA: "gamma", GAMMA_STAR: "gamma_star"}
_COLOR_CODES = {v: k for k, v in _COLOR_NAMES.items()}


class CriticalMap:
    """Immutable rhombic quad-map.

    Parameters
    ----------
    delta : float
        Common rhombus side length, positive.
    positions : array_like of complex
        Embedding Z of the vertices, indexed by dense vertex id.
    colors : array_like of int
        0 (gamma) or 1 (gamma_star) per vertex.
    quads : array_like of int, shape (Q, 4)
        Faces as vertex quadruples. The constructor rotates each quadruple
        to start on a gamma vertex and flips clockwise ones, so any cyclic
        presentation of a counterclockwise face is accepted.
    origin : int
        Distinguished base vertex for integration and monomials.
    """

    def __init__(self, delta, positions, colors, quads, origin):
        delta = float(delta)
        if not (delta > 0.0) or not math.isfinite(delta):
            raise ValidationError(f"delta must be a positive finite number, got {delta}")
        pos = np.array(positions, dtype=np.complex128)
        col = np.array(colors, dtype=np.uint8)
        qds = np.array(quads, dtype=np.int64)
        if pos.ndim != 1 or pos.size == 0:
            raise ValidationError("positions must be a non-empty 1-d array")
        if col.shape != pos.shape:
            raise ValidationError("colors and positions must have the same length")
        if not np.all((col == GAMMA) | (col == GAMMA_STAR)):
            raise ValidationError("colors must be 0 (gamma) or 1 (gamma_star)")
        if qds.ndim != 2 or qds.shape[1] != 4 or qds.shape[0] == 0:
            raise ValidationError("quads must be a non-empty (Q, 4) array")
        nv = pos.size
        if qds.min() < 0 or qds.max() >= nv:
            raise ValidationError("quad vertex id out of range")
        origin = int(origin)
        if not 0 <= origin < nv:
            raise ValidationError(f"origin id {origin} out of range")

        qds = self._normalize_quads(pos, col, qds)

        self.delta = delta
        self.positions = pos
        self.colors = col
        self.quads = qds
        self.origin = origin
        x, y, xp, yp = qds[:, 0], qds[:, 1], qds[:, 2], qds[:, 3]
        gd = np.abs(pos[xp] - pos[x])
        with np.errstate(divide="ignore", invalid="ignore"):
            self.rho = np.abs(pos[yp] - pos[y]) / gd
        angles = self._corner_angles()
        self.eta = float(angles.min() / 2.0) if angles.size else 0.0
        for a in (self.positions, self.colors, self.quads, self.rho):
            a.setflags(write=False)
        self._cache = {}

    @staticmethod
    def _normalize_quads(pos, col, qds):
        qds = qds.copy()
        for q in range(qds.shape[0]):
            row = qds[q]
            if len(set(row.tolist())) != 4:
                raise ValidationError(f"quad {q} repeats a vertex: {row.tolist()}")
            c = col[row]
            if not (np.all(c[[0, 2]] == c[0]) and np.all(c[[1, 3]] == c[1]) and c[0] != c[1]):
                raise ValidationError(f"quad {q} colors do not alternate: {c.tolist()}")
            z = pos[row]
            area = 0.5 * np.sum((z * np.conj(np.roll(z, -1))).imag)
            if area > 0.0:   # shoelace with conj ordering flips the usual sign
                row = row[[0, 3, 2, 1]]
            if col[row[0]] != GAMMA:
                row = np.roll(row, -1)
            qds[q] = row
        return qds

    def _corner_angles(self):
        z = self.positions[self.quads]
        prev = np.roll(z, 1, axis=1)
        nxt = np.roll(z, -1, axis=1)
        return np.angle((prev - z) * np.conj(nxt - z))

    # -- basic queries ---------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return self.positions.size

    @property
    def quad_count(self) -> int:
        return self.quads.shape[0]

    def z(self, vertex: int) -> complex:
        return complex(self.positions[vertex])

    def color(self, vertex: int) -> int:
        return int(self.colors[vertex])

    def __eq__(self, other):
        if not isinstance(other, CriticalMap):
            return NotImplemented
        return (
            self.delta == other.delta
            and self.origin == other.origin
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.colors, other.colors)
            and np.array_equal(self.quads, other.quads)
        )

    __hash__ = object.__hash__

    def __repr__(self):
        return (
            f"CriticalMap(delta={self.delta:g}, vertices={self.vertex_count}, "
            f"quads={self.quad_count}, origin={self.origin})"
        )

    # -- derived structure, cached ----------------------------------------

    @property
    def edges(self) -> np.ndarray:
        """Unique quad-graph edges as sorted (a, b) pairs, lexicographic."""
        if "edges" not in self._cache:
            sides = np.stack(
                [self.quads, np.roll(self.quads, -1, axis=1)], axis=2
            ).reshape(-1, 2)
            sides.sort(axis=1)
            uniq, counts = np.unique(sides, axis=0, return_counts=True)
            uniq.setflags(write=False)
            counts.setflags(write=False)
            self._cache["edges"] = uniq
            self._cache["edge_use"] = counts
        return self._cache["edges"]

    @property
    def edge_use_count(self) -> np.ndarray:
        self.edges
        return self._cache["edge_use"]

    @property
    def boundary_vertex_mask(self) -> np.ndarray:
        if "bmask" not in self._cache:
            mask = np.zeros(self.vertex_count, dtype=bool)
            be = self.edges[self.edge_use_count == 1]
            mask[be.ravel()] = True
            mask.setflags(write=False)
            self._cache["bmask"] = mask
        return self._cache["bmask"]

    @property
    def boundary_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.boundary_vertex_mask)

    @property
    def neighbor_csr(self):
        """(indptr, indices): sorted adjacency over quad-graph edges."""
        if "csr" not in self._cache:
            e = self.edges
            both = np.concatenate([e, e[:, ::-1]])
            order = np.lexsort((both[:, 1], both[:, 0]))
            both = both[order]
            indptr = np.zeros(self.vertex_count + 1, dtype=np.int64)
            np.add.at(indptr, both[:, 0] + 1, 1)
            np.cumsum(indptr, out=indptr)
            indices = np.ascontiguousarray(both[:, 1])
            indptr.setflags(write=False)
            indices.setflags(write=False)
            self._cache["csr"] = (indptr, indices)
        return self._cache["csr"]

    def neighbors(self, vertex: int) -> np.ndarray:
        indptr, indices = self.neighbor_csr
        return indices[indptr[vertex] : indptr[vertex + 1]]

    @property
    def bfs(self):
        """(order, parent, level_starts) of the BFS tree rooted at origin.

        Deterministic: neighbors are visited in ascending id order. Raises
        if the map is disconnected, since every path-based construction
        needs to reach each vertex.
        """
        if "bfs" not in self._cache:
            indptr, indices = self.neighbor_csr
            nv = self.vertex_count
            order = np.zeros(nv, dtype=np.int64)
            parent = np.full(nv, -1, dtype=np.int64)
            seen = np.zeros(nv, dtype=bool)
            order[0] = self.origin
            seen[self.origin] = True
            level_starts = [0, 1]
            lo, hi = 0, 1
            while lo < hi:
                tail = hi
                for i in range(lo, hi):
                    v = order[i]
                    for u in indices[indptr[v] : indptr[v + 1]]:
                        if not seen[u]:
                            seen[u] = True
                            parent[u] = v
                            order[tail] = u
                            tail += 1
                lo, hi = hi, tail
                if tail > level_starts[-1]:
                    level_starts.append(tail)
            if hi != nv:
                raise ValidationError(
                    f"map is not connected: reached {hi} of {nv} vertices from origin"
                )
            ls = np.asarray(level_starts, dtype=np.int64)
            for a in (order, parent, ls):
                a.setflags(write=False)
            self._cache["bfs"] = (order, parent, ls)
        return self._cache["bfs"]

    @property
    def vertex_quad_incidence(self):
        """(indptr, quad_idx, corner): faces around each vertex, ascending."""
        if "vqi" not in self._cache:
            flat = self.quads.ravel()
            order = np.argsort(flat, kind="stable")
            quad_idx = (order // 4).astype(np.int64)
            corner = (order % 4).astype(np.int64)
            indptr = np.zeros(self.vertex_count + 1, dtype=np.int64)
            np.add.at(indptr, flat + 1, 1)
            np.cumsum(indptr, out=indptr)
            for a in (indptr, quad_idx, corner):
                a.setflags(write=False)
            self._cache["vqi"] = (indptr, quad_idx, corner)
        return self._cache["vqi"]

    def incident_quads(self, vertex: int):
        indptr, quad_idx, corner = self.vertex_quad_incidence
        s = slice(indptr[vertex], indptr[vertex + 1])
        return quad_idx[s], corner[s]

    def diagonal_quad(self, a: int, b: int):
        """Quad whose gamma or gamma_star diagonal is (a, b), else None."""
        if "diag" not in self._cache:
            table = {}
            for q in range(self.quad_count):
                x, y, xp, yp = self.quads[q]
                table.setdefault((min(x, xp), max(x, xp)), q)
                table.setdefault((min(y, yp), max(y, yp)), q)
            self._cache["diag"] = table
        return self._cache["diag"].get((min(a, b), max(a, b)))

    # -- geometry helpers --------------------------------------------------

    def rebased(self, scale: complex, new_origin: int) -> "CriticalMap":
        """Map with positions scale * (Z - Z(new_origin)), origin moved."""
        scale = complex(scale)
        if scale == 0:
            raise ValidationError("rebase scale must be nonzero")
        pos = scale * (self.positions - self.positions[new_origin])
        return CriticalMap(
            abs(scale) * self.delta, pos, self.colors, self.quads, new_origin
        )

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "delta": self.delta,
            "origin": int(self.origin),
            "vertices": [
                {
                    "id": i,
                    "z": [float(self.positions[i].real), float(self.positions[i].imag)],
                    "color": _COLOR_NAMES[int(self.colors[i])],
                }
                for i in range(self.vertex_count)
            ],
            "quads": self.quads.tolist(),
        }

    def save(self, path) -> None:
        write_json_atomic(path, self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: dict) -> "CriticalMap":
        for key in ("delta", "origin", "vertices", "quads"):
            if key not in data:
                raise ValidationError(f"map file is missing the {key!r} field")
        verts = data["vertices"]
        if not isinstance(verts, list) or not verts:
            raise ValidationError("'vertices' must be a non-empty list")
        ids = []
        for v in verts:
            try:
                ids.append(int(v["id"]))
            except (TypeError, KeyError) as exc:
                raise ValidationError(f"malformed vertex entry {v!r}") from exc
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate vertex ids")
        remap = {vid: k for k, vid in enumerate(sorted(ids))}
        nv = len(ids)
        pos = np.zeros(nv, dtype=np.complex128)
        col = np.zeros(nv, dtype=np.uint8)
        for v in verts:
            k = remap[int(v["id"])]
            try:
                re, im = v["z"]
                pos[k] = complex(float(re), float(im))
                col[k] = _COLOR_CODES[v["color"]]
            except (TypeError, ValueError, KeyError) as exc:
                raise ValidationError(f"malformed vertex entry {v!r}") from exc
        try:
            quads = [[remap[int(u)] for u in q] for q in data["quads"]]
        except (TypeError, ValueError, KeyError) as exc:
            raise ValidationError("quad references an unknown vertex id") from exc
        if int(data["origin"]) not in remap:
            raise ValidationError(f"origin id {data['origin']} is not a vertex")
        return cls(data["delta"], pos, col, quads, remap[int(data["origin"])])

    @classmethod
    def load(cls, path) -> "CriticalMap":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_json_dict(data)


def write_json_atomic(path, data) -> None:
    """Write JSON via a temp file and rename, so readers never see a prefix."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- builders ----------------------------------------------------------------


def build_rect_lattice(delta, theta, rows, cols, origin_at=0j) -> CriticalMap:
    """Rectangular rhombic patch.

    Vertices sit at P(m, n) = delta * (m e^{i theta} + n e^{-i theta}) for
    m in 0..cols, n in 0..rows, colored by the parity of m + n (even is
    gamma). Each unit cell is a rhombus with half-angle theta at its
    horizontal corners, so horizontal gamma diagonals carry
    rho = tan(theta) and vertical gamma_star ones 1/tan(theta).

    origin_at picks the origin vertex by position; it must match a lattice
    vertex to within 1e-9 * delta.
    """
    delta = float(delta)
    theta = float(theta)
    rows = int(rows)
    cols = int(cols)
    if rows < 1 or cols < 1:
        raise ValidationError("rows and cols must be at least 1")
    if not 0.0 < theta < math.pi / 2:
        raise ValidationError(f"theta must lie strictly between 0 and pi/2, got {theta}")
    if not delta > 0.0:
        raise ValidationError(f"delta must be positive, got {delta}")

    e1 = delta * np.exp(1j * theta)
    e2 = delta * np.exp(-1j * theta)
    m, n = np.meshgrid(np.arange(cols + 1), np.arange(rows + 1), indexing="ij")
    m = m.ravel()
    n = n.ravel()
    pos = m * e1 + n * e2
    col = ((m + n) % 2).astype(np.uint8)

    def vid(mm, nn):
        return mm * (rows + 1) + nn

    quads = []
    for mm in range(cols):
        for nn in range(rows):
            c00 = vid(mm, nn)
            c01 = vid(mm, nn + 1)
            c11 = vid(mm + 1, nn + 1)
            c10 = vid(mm + 1, nn)
            if (mm + nn) % 2 == 0:
                quads.append((c00, c01, c11, c10))
            else:
                quads.append((c01, c11, c10, c00))

    origin_at = complex(origin_at)
    dist = np.abs(pos - origin_at)
    k = int(np.argmin(dist))
    if dist[k] > 1e-9 * delta:
        raise ValidationError(
            f"origin_at {origin_at} matches no lattice vertex; nearest is id {k} "
            f"at {complex(pos[k])} (distance {dist[k]:.3e})"
        )
    return CriticalMap(delta, pos, col, quads, k)


def build_chain(n) -> CriticalMap:
    """Chain of n unit squares of side 1/n sitting on the real axis.

    Axis vertices v_l = l/n (ids 0..n) alternate colors starting gamma at
    the origin; apex vertices w_l = l/n + i/n (ids n+1..2n+1) carry the
    opposite colors. Square l is the face (v_l, v_{l+1}, w_{l+1}, w_l).
    The path 0, 1, .., n runs along the real axis with steps of delta = 1/n.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("chain length must be at least 1")
    delta = 1.0 / n
    ls = np.arange(n + 1)
    pos = np.concatenate([ls * delta, ls * delta + 1j * delta])
    col = np.concatenate([ls % 2, (ls + 1) % 2]).astype(np.uint8)
    quads = [(l, l + 1, n + 1 + l + 1, n + 1 + l) for l in range(n)]
    return CriticalMap(delta, pos, col, quads, 0)


# -- validation ---------------------------------------------------------------


@dataclass
class Violation:
    """One failed criticality check, with the quantity that failed it."""

    kind: str
    where: str
    measured: float
    message: str

    def __str__(self):
        return f"[{self.kind}] {self.where}: {self.message} (measured {self.measured:.6e})"


def validate_criticality(cmap: CriticalMap, tol: float = 1e-12) -> list[Violation]:
    """Check every structural invariant; an empty report means critical.

    Geometric tolerances are relative to delta. The duality check uses the
    corner half-angle tangents tan(a_x/2) tan(a_y/2) = 1, which perturbed
    embeddings genuinely fail, unlike a ratio recomputed from the same
    diagonals.
    """
    out = []
    pos = cmap.positions
    delta = cmap.delta
    z = pos[cmap.quads]

    sides = np.abs(np.roll(z, -1, axis=1) - z)
    bad = np.abs(sides - delta) > tol * delta
    for q, i in zip(*np.nonzero(bad)):
        out.append(
            Violation(
                "side_length",
                f"quad {q} side {i}",
                float(abs(sides[q, i] - delta)),
                f"side length {sides[q, i]:.12g} differs from delta {delta:.12g}",
            )
        )

    # diagonal orthogonality in the counterclockwise sense: y'-y = i rho (x'-x)
    dg = z[:, 2] - z[:, 0]
    ds = z[:, 3] - z[:, 1]
    res = np.abs(ds - 1j * cmap.rho * dg)
    for q in np.nonzero(res > tol * delta)[0]:
        out.append(
            Violation(
                "diagonal_orthogonality",
                f"quad {q}",
                float(res[q]),
                "gamma_star diagonal is not i*rho times the gamma diagonal",
            )
        )

    angles = cmap._corner_angles()
    for q, i in zip(*np.nonzero(angles < 1e-9)):
        out.append(
            Violation(
                "degenerate_angle",
                f"quad {q} corner {i}",
                float(angles[q, i]),
                "face corner collapsed or reflex",
            )
        )
    ok = np.all(angles > 1e-9, axis=1)
    half = np.tan(angles / 2.0)
    for pair in ((0, 1), (2, 3)):
        prod = half[:, pair[0]] * half[:, pair[1]]
        bad = ok & (np.abs(prod - 1.0) > max(tol, 1e-12))
        for q in np.nonzero(bad)[0]:
            out.append(
                Violation(
                    "diagonal_duality",
                    f"quad {q} corners {pair}",
                    float(abs(prod[q] - 1.0)),
                    "corner half-angle tangents do not multiply to 1",
                )
            )

    e = cmap.edges
    same = cmap.colors[e[:, 0]] == cmap.colors[e[:, 1]]
    for i in np.nonzero(same)[0]:
        out.append(
            Violation(
                "bipartite",
                f"edge {tuple(e[i])}",
                1.0,
                "edge joins two vertices of the same color",
            )
        )

    over = cmap.edge_use_count > 2
    for i in np.nonzero(over)[0]:
        out.append(
            Violation(
                "edge_sharing",
                f"edge {tuple(e[i])}",
                float(cmap.edge_use_count[i]),
                "edge borders more than two faces",
            )
        )

    try:
        cmap.bfs
        reached = cmap.vertex_count
    except ValidationError:
        indptr, indices = cmap.neighbor_csr
        seen = {cmap.origin}
        stack = [cmap.origin]
        while stack:
            v = stack.pop()
            for u in indices[indptr[v] : indptr[v + 1]]:
                if int(u) not in seen:
                    seen.add(int(u))
                    stack.append(int(u))
        reached = len(seen)
        out.append(
            Violation(
                "connectivity",
                "map",
                float(reached),
                f"only {reached} of {cmap.vertex_count} vertices reachable from origin",
            )
        )

    euler = cmap.vertex_count - cmap.edges.shape[0] + cmap.quad_count
    if reached == cmap.vertex_count and euler != 1:
        out.append(
            Violation(
                "topology",
                "map",
                float(euler),
                f"Euler characteristic V - E + F = {euler}, expected 1 for a disc",
            )
        )
    return out


# -- paths -------------------------------------------------------------------


@dataclass(frozen=True)
class PathRef:
    """Validated walk along quad-graph edges."""

    cmap: CriticalMap
    ids: tuple

    @property
    def is_closed(self) -> bool:
        return self.ids[0] == self.ids[-1]


def as_path(cmap: CriticalMap, ids) -> PathRef:
    """Validate ids as a quad-graph walk and wrap it."""
    ids = [int(i) for i in ids]
    if len(ids) < 1:
        raise ValidationError("path needs at least one vertex")
    nv = cmap.vertex_count
    for i in ids:
        if not 0 <= i < nv:
            raise ValidationError(f"path vertex {i} out of range")
    indptr, indices = cmap.neighbor_csr
    for a, b in zip(ids[:-1], ids[1:]):
        nbrs = indices[indptr[a] : indptr[a + 1]]
        if not np.any(nbrs == b):
            raise ValidationError(f"path step ({a}, {b}) is not a quad-graph edge")
    return PathRef(cmap, tuple(ids))

import json
import math

import numpy as np
import pytest

from dch import (
    GAMMA,
    GAMMA_STAR,
    CriticalMap,
    ValidationError,
    as_path,
    build_chain,
    build_rect_lattice,
    validate_criticality,
)


def rhombus(theta=math.pi / 3, delta=1.0):
    """Single-quad map: origin, two neighbors, far corner."""
    pos = np.array(
        [
            0.0,
            delta * np.exp(1j * theta),
            delta * (np.exp(1j * theta) + np.exp(-1j * theta)),
            delta * np.exp(-1j * theta),
        ],
        dtype=complex,
    )
    colors = np.array([GAMMA, GAMMA_STAR, GAMMA, GAMMA_STAR])
    return pos, colors


def test_rect_builder_shape():
    cmap = build_rect_lattice(0.5, math.pi / 3, 2, 3)
    assert cmap.vertex_count == 12
    assert cmap.quad_count == 6
    assert cmap.delta == 0.5
    assert cmap.positions[cmap.origin] == 0
    assert cmap.color(cmap.origin) == GAMMA
    assert validate_criticality(cmap) == []


def test_rect_side_lengths():
    cmap = build_rect_lattice(0.3, 1.1, 3, 4)
    z = cmap.positions[cmap.quads]
    sides = np.abs(np.roll(z, -1, axis=1) - z)
    assert np.allclose(sides, 0.3, rtol=0, atol=1e-14)


def test_rect_rho_alternates_with_parity():
    # quads alternate which diagonal carries gamma, so rho is tan or cot
    theta = math.pi / 6
    cmap = build_rect_lattice(1.0, theta, 4, 4)
    t, c = math.tan(theta), 1.0 / math.tan(theta)
    near_t = np.isclose(cmap.rho, t, rtol=1e-13)
    near_c = np.isclose(cmap.rho, c, rtol=1e-13)
    assert np.all(near_t | near_c)
    assert near_t.any() and near_c.any()
    # half of the smallest rhombus angle
    assert math.isclose(cmap.eta, theta, rel_tol=1e-12)


def test_chain_geometry():
    n = 4
    cmap = build_chain(n)
    assert cmap.vertex_count == 2 * n + 2
    assert cmap.quad_count == n
    assert cmap.delta == 0.25
    assert cmap.origin == 0
    # axis vertices at l/n, apexes shifted by i/n
    for l in range(n + 1):
        assert cmap.z(l) == l / n
        assert abs(cmap.z(n + 1 + l) - (l / n + 1j / n)) < 1e-15
    assert validate_criticality(cmap) == []


def test_quad_normalization_rotation():
    pos, colors = rhombus()
    base = CriticalMap(1.0, pos, colors, [[0, 1, 2, 3]], 0)
    rotated = CriticalMap(1.0, pos, colors, [[1, 2, 3, 0]], 0)
    reversed_ = CriticalMap(1.0, pos, colors, [[0, 3, 2, 1]], 0)
    assert base.quads.tolist() == rotated.quads.tolist() == reversed_.quads.tolist()
    assert base.colors[base.quads[0, 0]] == GAMMA


def test_quad_counterclockwise_after_normalization():
    pos, colors = rhombus()
    cmap = CriticalMap(1.0, pos, colors, [[0, 3, 2, 1]], 0)
    x, y, xp, yp = cmap.quads[0]
    dg = cmap.z(xp) - cmap.z(x)
    ds = cmap.z(yp) - cmap.z(y)
    assert abs(ds - 1j * cmap.rho[0] * dg) < 1e-15


def test_quad_color_validation():
    pos, colors = rhombus()
    bad = colors.copy()
    bad[1] = GAMMA
    with pytest.raises(ValidationError):
        CriticalMap(1.0, pos, bad, [[0, 1, 2, 3]], 0)
    with pytest.raises(ValidationError):
        CriticalMap(1.0, pos, colors, [[0, 1, 2, 2]], 0)


def test_edges_and_boundary():
    cmap = build_rect_lattice(1.0, math.pi / 4, 2, 2)
    assert cmap.edges.shape == (12, 2)
    # all but the center vertex lie on the boundary of a 2x2 patch
    assert cmap.boundary_vertices.size == 8
    assert set(cmap.edge_use_count.tolist()) <= {1, 2}
    chain = build_chain(3)
    assert chain.boundary_vertices.size == chain.vertex_count


def test_bfs_deterministic():
    cmap = build_rect_lattice(1.0, math.pi / 4, 3, 3)
    order, parent, level_starts = cmap.bfs
    assert order[0] == cmap.origin
    assert parent[cmap.origin] == -1
    seen = np.zeros(cmap.vertex_count, bool)
    seen[cmap.origin] = True
    for v in order[1:]:
        p = parent[v]
        assert seen[p] and not seen[v]
        assert p in cmap.neighbors(v)
        seen[v] = True
    assert list(level_starts) == sorted(level_starts)
    again = cmap.bfs
    assert again[0] is order  # cached


def test_neighbors_sorted():
    cmap = build_rect_lattice(1.0, math.pi / 4, 2, 2)
    for v in range(cmap.vertex_count):
        nb = cmap.neighbors(v)
        assert list(nb) == sorted(nb)


def test_diagonal_quad_lookup():
    cmap = build_rect_lattice(1.0, math.pi / 4, 2, 2)
    x, y, xp, yp = cmap.quads[0]
    assert cmap.diagonal_quad(x, xp) == 0
    assert cmap.diagonal_quad(yp, y) == 0
    assert cmap.diagonal_quad(x, y) is None


def test_incident_quads():
    cmap = build_rect_lattice(1.0, math.pi / 4, 2, 2)
    center = int(np.argmin(np.abs(cmap.positions - cmap.positions.mean())))
    qs, corners = cmap.incident_quads(center)
    assert len(qs) == 4
    assert all(cmap.quads[q, c] == center for q, c in zip(qs, corners))


def test_json_round_trip(tmp_path):
    cmap = build_rect_lattice(0.25, math.pi / 6, 2, 3)
    path = tmp_path / "map.json"
    cmap.save(path)
    loaded = CriticalMap.load(path)
    assert loaded == cmap
    cmap.save(tmp_path / "again.json")
    assert (tmp_path / "map.json").read_bytes() == (tmp_path / "again.json").read_bytes()
    assert not list(tmp_path.glob("*.tmp*"))


def test_load_remaps_sparse_ids(tmp_path):
    pos, colors = rhombus()
    data = {
        "delta": 1.0,
        "origin": 10,
        "vertices": [
            {"id": vid, "z": [pos[i].real, pos[i].imag],
             "color": "gamma" if colors[i] == GAMMA else "gamma_star"}
            for i, vid in enumerate([10, 40, 20, 30])
        ],
        "quads": [[10, 40, 20, 30]],
    }
    path = tmp_path / "sparse.json"
    path.write_text(json.dumps(data))
    cmap = CriticalMap.load(path)
    assert cmap.vertex_count == 4
    assert cmap.quads.max() == 3
    assert cmap.positions[cmap.origin] == 0
    assert validate_criticality(cmap) == []


def test_rebased():
    cmap = build_rect_lattice(0.5, math.pi / 4, 2, 2)
    new_origin = 4
    out = cmap.rebased(2j, new_origin)
    assert out.origin == new_origin
    assert out.positions[new_origin] == 0
    assert math.isclose(out.delta, 1.0)
    assert np.allclose(out.positions, 2j * (cmap.positions - cmap.positions[new_origin]))
    assert validate_criticality(out) == []
    with pytest.raises(ValidationError):
        cmap.rebased(0, 0)


def test_validate_detects_moved_vertex():
    cmap = build_rect_lattice(1.0, math.pi / 4, 2, 2)
    pos = cmap.positions.copy()
    pos[4] += 0.01
    bad = CriticalMap(cmap.delta, pos, cmap.colors, cmap.quads, cmap.origin)
    kinds = {v.kind for v in validate_criticality(bad)}
    assert "side_length" in kinds
    assert "diagonal_duality" in kinds or "diagonal_orthogonality" in kinds


def test_validate_detects_disconnection():
    pos1, colors1 = rhombus()
    pos = np.concatenate([pos1, pos1 + 50.0])
    colors = np.concatenate([colors1, colors1])
    cmap = CriticalMap(1.0, pos, colors, [[0, 1, 2, 3], [4, 5, 6, 7]], 0)
    kinds = {v.kind for v in validate_criticality(cmap)}
    assert "connectivity" in kinds
    with pytest.raises(ValidationError):
        cmap.bfs


def test_builder_rejects_bad_arguments():
    with pytest.raises(ValidationError):
        build_rect_lattice(1.0, 0.0, 2, 2)
    with pytest.raises(ValidationError):
        build_rect_lattice(1.0, math.pi / 2, 2, 2)
    with pytest.raises(ValidationError):
        build_rect_lattice(-1.0, math.pi / 4, 2, 2)
    with pytest.raises(ValidationError):
        build_rect_lattice(1.0, math.pi / 4, 0, 2)
    with pytest.raises(ValidationError):
        build_chain(0)
    with pytest.raises(ValidationError):
        build_rect_lattice(1.0, math.pi / 4, 2, 2, origin_at=100 + 0j)


def test_as_path():
    cmap = build_rect_lattice(1.0, math.pi / 4, 2, 2)
    x, y, xp, yp = cmap.quads[0]
    path = as_path(cmap, [x, y, xp, yp, x])
    assert path.is_closed
    assert not as_path(cmap, [x, y]).is_closed
    assert as_path(cmap, [x]).ids == (x,)  # trivial walk is fine
    with pytest.raises(ValidationError):
        as_path(cmap, [x, xp])  # diagonal, not an edge
    with pytest.raises(ValidationError):
        as_path(cmap, [])
    with pytest.raises(ValidationError):
        as_path(cmap, [x, 99])

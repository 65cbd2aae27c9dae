import math
import warnings

import numpy as np
import pytest

from dch import (
    FaceFunction,
    NotHolomorphicError,
    PoleProximityError,
    RatioMismatchError,
    SeriesDivergenceWarning,
    ValidationError,
    VertexFunction,
    as_path,
    build_chain,
    build_rect_lattice,
    coordinate,
    cr_residual,
    derivative_edge_residuals,
    derive_duffin,
    dual,
    edge_increments,
    epsilon,
    exp_product,
    exp_series_partial,
    face_derivative,
    integrate_lambda_edge,
    integrate_path,
    loop_integral,
    monomial,
    morera_residual,
    primitive,
    random_holomorphic,
)


@pytest.fixture
def patch():
    return build_rect_lattice(0.5, math.pi / 3, 3, 3)


@pytest.fixture
def square():
    return build_rect_lattice(0.25, math.pi / 4, 4, 4)


def test_integrate_path_is_trapezoid(patch):
    f = VertexFunction.from_callable(patch, lambda z: z * z)
    x, y = patch.edges[0]
    val = integrate_path(f, [x, y])
    za, zb = patch.z(x), patch.z(y)
    assert val == pytest.approx(0.5 * (f(x) + f(y)) * (zb - za), abs=1e-15)
    # reversing flips the sign, concatenating adds
    assert integrate_path(f, [y, x]) == pytest.approx(-val, abs=1e-15)


def test_loop_integral_proportional_to_residual(patch, rng):
    vals = rng.standard_normal(patch.vertex_count) + 1j * rng.standard_normal(
        patch.vertex_count
    )
    f = VertexFunction(patch, vals)
    for q in range(patch.quad_count):
        x, y, xp, yp = patch.quads[q]
        expected = -0.5 * (patch.z(xp) - patch.z(x)) * cr_residual(f, q)
        assert loop_integral(f, q) == pytest.approx(expected, abs=1e-14)


def test_lambda_edge_averages_both_routes(patch, rng):
    vals = rng.standard_normal(patch.vertex_count) + 1j * rng.standard_normal(
        patch.vertex_count
    )
    f = VertexFunction(patch, vals)
    q = 2
    x, y, xp, yp = patch.quads[q]
    via_y = integrate_path(f, [x, y, xp])
    via_yp = integrate_path(f, [x, yp, xp])
    got = integrate_lambda_edge(f, x, xp)
    assert got == pytest.approx(0.5 * (via_y + via_yp), abs=1e-15)
    got_dual = integrate_lambda_edge(f, y, yp)
    assert got_dual == pytest.approx(
        0.5 * (integrate_path(f, [y, x, yp]) + integrate_path(f, [y, xp, yp])),
        abs=1e-15,
    )
    with pytest.raises(ValidationError):
        integrate_lambda_edge(f, x, y)  # a side, not a diagonal


def test_primitive_of_epsilon_vanishes(patch):
    assert np.abs(primitive(epsilon(patch)).values).max() == 0.0


def test_primitive_of_one_is_coordinate(patch):
    p = primitive(VertexFunction.constant(patch, 1.0))
    z0 = patch.positions[patch.origin]
    assert np.allclose(p.values, patch.positions - z0, atol=1e-14)


def test_primitive_path_independent(patch):
    f = random_holomorphic(patch, rng=np.random.default_rng(3))
    p = primitive(f)
    # primitive differences equal trapezoid integrals along any edge walk
    x, y = patch.edges[7]
    assert p(y) - p(x) == pytest.approx(integrate_path(f, [x, y]), abs=1e-12)
    assert p(patch.origin) == 0


def test_primitive_rejects_non_holomorphic(patch):
    with pytest.raises(NotHolomorphicError):
        primitive(coordinate(patch).conj())


def test_monomial_low_degrees_pointwise(patch):
    z = patch.positions - patch.positions[patch.origin]
    assert np.allclose(monomial(patch, 0).values, 1.0, atol=0)
    assert np.allclose(monomial(patch, 1).values, z, atol=1e-15)
    assert np.allclose(monomial(patch, 2).values, z * z, atol=1e-14)
    assert monomial(patch, 5) is monomial(patch, 5)  # cached
    with pytest.raises(ValidationError):
        monomial(patch, -1)


def test_monomial_factor_normalization(patch):
    # Z^{:k:} = k * primitive(Z^{:k-1:})
    k = 4
    expected = k * primitive(monomial(patch, k - 1), check=False).values
    assert np.allclose(monomial(patch, k).values, expected, atol=0)


def test_chain_monomial_closed_form():
    # axis values on the subdivided segment pick up 1/n^2 corrections
    n = 6
    cmap = build_chain(n)
    z5 = monomial(cmap, 5)
    for l in range(n + 1):
        x = l / n
        want = x**5 + 5 * x**3 / n**2 + 1.5 * x / n**4
        assert abs(z5(l) - want) < 1e-13


def test_neighbor_value_closed_form():
    theta = math.pi / 5
    cmap = build_rect_lattice(0.2, theta, 2, 2)
    nb = [v for v in cmap.neighbors(cmap.origin)]
    x = cmap.z(nb[0])
    for k in range(1, 8):
        want = math.factorial(k) / 2 ** (k - 1) * x**k
        assert abs(monomial(cmap, k)(nb[0]) - want) <= 1e-12 * abs(want)


def test_dual_involution(patch, rng):
    vals = rng.standard_normal(patch.vertex_count) + 1j * rng.standard_normal(
        patch.vertex_count
    )
    f = VertexFunction(patch, vals)
    assert dual(dual(f)).max_abs_diff(f) == 0.0
    assert dual(f).values[0] == np.conj(f.values[0])  # origin is gamma


def test_derive_duffin_ladder(square):
    for k in (1, 2, 3):
        got = derive_duffin(monomial(square, k))
        diff = got.values - k * monomial(square, k - 1).values
        eps = epsilon(square).values
        c = diff[0] / eps[0]
        assert np.abs(diff - c * eps).max() < 1e-12


def test_derive_duffin_edge_rule(square):
    f = random_holomorphic(square, rng=np.random.default_rng(11))
    fp = derive_duffin(f)
    assert np.abs(derivative_edge_residuals(f, fp)).max() < 1e-11 * f.scale


def test_derive_duffin_rejects_non_holomorphic(square):
    with pytest.raises(NotHolomorphicError):
        derive_duffin(coordinate(square).conj())


def test_edge_increments_shape(patch):
    f = coordinate(patch)
    inc = edge_increments(f)
    assert inc.shape == (patch.edges.shape[0],)
    a, b = patch.edges[0]
    dz = patch.z(b) - patch.z(a)
    assert inc[0] == pytest.approx(0.5 * (f(a) + f(b)) * dz, abs=1e-15)


def test_exp_product_neighbor_value(square):
    lam = 0.75 - 0.25j
    e = exp_product(square, lam)
    assert e(square.origin) == 1.0
    v = int(square.neighbors(square.origin)[0])
    d = square.z(v) - square.z(square.origin)
    want = (1 + lam * d / 2) / (1 - lam * d / 2)
    assert e(v) == pytest.approx(want, rel=1e-14)


def test_exp_product_solves_edge_ode(square):
    lam = 0.6 + 0.2j
    e = exp_product(square, lam)
    # d Exp = lam Exp dZ on every edge
    res = derivative_edge_residuals(e, lam * e)
    assert np.abs(res).max() < 1e-13 * e.scale


def test_exp_is_holomorphic_and_primitive_matches(square):
    lam = 0.5
    e = exp_product(square, lam)
    p = primitive(lam * e)
    assert p.max_abs_diff(e - 1.0) < 1e-13 * e.scale


def test_exp_pole_guard():
    cmap = build_chain(4)  # delta = 1/4, real edge direction
    with pytest.raises(PoleProximityError):
        exp_product(cmap, 8.0)


def test_exp_series_matches_product(square):
    lam = 0.9
    series = exp_series_partial(square, lam, 30)
    prod = exp_product(square, lam)
    assert series.max_abs_diff(prod) < 1e-12


def test_exp_series_warns_outside_disc():
    cmap = build_chain(5)  # delta = 0.2, disc radius 10
    with pytest.warns(SeriesDivergenceWarning):
        exp_series_partial(cmap, 12.0, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        exp_series_partial(cmap, 3.0, 10)


def test_exp_dual_symmetry():
    # f -> dual of Exp with the reflected parameter, exact at delta = 2
    cmap = build_rect_lattice(2.0, math.pi / 3, 3, 3)
    lam = 0.3 + 0.2j
    left = dual(exp_product(cmap, lam))
    right = exp_product(cmap, 1.0 / np.conj(lam))
    assert left.max_abs_diff(right) < 1e-12 * left.scale


def test_face_derivative_of_square_is_corner_sum(patch):
    f = monomial(patch, 2)
    d = face_derivative(f)
    z = patch.positions[patch.quads]
    want = z[:, 0] + z[:, 2] - 2 * patch.positions[patch.origin]
    assert np.allclose(d.values, want, atol=1e-13)


def test_face_derivative_rejects_mismatch(patch):
    with pytest.raises(RatioMismatchError):
        face_derivative(coordinate(patch).conj())


def test_face_function_validation(patch):
    with pytest.raises(ValidationError):
        FaceFunction(patch, np.zeros(3))


def test_morera_interior_vanishes(patch):
    f = random_holomorphic(patch, rng=np.random.default_rng(7))
    d = face_derivative(f, tol=1e-6)
    interior = [
        v for v in range(patch.vertex_count) if not patch.boundary_vertex_mask[v]
    ]
    for v in interior:
        assert abs(morera_residual(d, v)) < 1e-10 * f.scale
    with pytest.raises(ValidationError):
        morera_residual(d, int(patch.boundary_vertices[0]))


def test_integrate_path_accepts_pathref(patch):
    f = coordinate(patch)
    x, y = patch.edges[0]
    assert integrate_path(f, as_path(patch, [x, y])) == integrate_path(f, [x, y])

"""Heisenberg group, Cayley transform, quadrature and polynomial algebra."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crstab.heisenberg import (
    CRDimension,
    HPoint,
    cayley,
    cayley_arrays,
    cayley_jacobian,
    cayley_inv,
    cayley_inv_arrays,
    dilate,
    extremal_profile,
    group_compose,
    heisenberg_lp_norm,
    heisenberg_lp_norm_direct,
    homogeneous_norm,
    jacobian_heisenberg_side,
    jacobian_sphere_side,
    transfer_to_heisenberg,
)
from crstab.polynomial import ComplexPolynomial, reduce_sphere
from crstab.quadrature import monomial_integral, quadrature_grid, random_sphere_points, sphere_area

coord = st.floats(-3, 3, allow_nan=False)


@st.composite
def hpoints(draw, n=1):
    z = [complex(draw(coord), draw(coord)) for _ in range(n)]
    return HPoint(np.array(z), draw(coord))


def close(u: HPoint, v: HPoint, tol=1e-10):
    return np.allclose(u.z, v.z, atol=tol) and abs(u.t - v.t) < tol


def test_group_law_example():
    out = group_compose(HPoint([1.0], 0.0), HPoint([1j], 0.0))
    assert close(out, HPoint([1 + 1j], -2.0))


def test_group_identity_and_inverse():
    u = HPoint([0.3 - 0.2j, 1.1j], 0.7)
    assert close(group_compose(HPoint.identity(2), u), u)
    assert close(group_compose(u, u.inverse()), HPoint.identity(2))


def test_group_dimension_mismatch():
    with pytest.raises(ValueError):
        group_compose(HPoint([1.0], 0.0), HPoint([1.0, 0.0], 0.0))


@given(hpoints(), hpoints(), hpoints())
def test_group_associative(a, b, c):
    assert close(group_compose(group_compose(a, b), c), group_compose(a, group_compose(b, c)), 1e-8)


@given(hpoints(), st.floats(0.1, 5))
def test_norm_homogeneous_and_symmetric(u, delta):
    assert math.isclose(homogeneous_norm(dilate(delta, u)), delta * homogeneous_norm(u), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(homogeneous_norm(u.inverse()), homogeneous_norm(u), rel_tol=1e-12, abs_tol=1e-15)


def test_norm_examples():
    assert homogeneous_norm(HPoint([0.0], 1.0)) == 1.0
    assert math.isclose(homogeneous_norm(HPoint([3 + 4j], 0.0)), 5.0)


def test_dilation():
    assert close(dilate(2.0, HPoint([1.0], 1.0)), HPoint([2.0], 4.0))
    u = HPoint([0.2j], -0.4)
    assert close(dilate(1.0, u), u)
    with pytest.raises(ValueError):
        dilate(0.0, u)


def test_cayley_origin_is_north_pole():
    np.testing.assert_allclose(cayley(HPoint.identity(2)), [0, 0, 1])


@given(hpoints(n=2))
def test_cayley_round_trip(u):
    xi = cayley(u)
    assert abs(np.linalg.norm(xi) - 1.0) < 1e-12
    back = cayley_inv(xi)
    scale = max(1.0, homogeneous_norm(u) ** 2)
    assert close(back, u, 1e-12 * scale)


def test_cayley_jacobian_at_origin():
    assert cayley_jacobian(HPoint.identity(1)) == 8.0


def test_cayley_south_pole_rejected():
    with pytest.raises(ValueError):
        cayley_inv(np.array([0.0, -1.0]))
    with pytest.raises(ValueError):
        cayley_inv(np.array([0.0, 0.5]))


def test_jacobian_sides_agree(rng):
    xi = random_sphere_points(2, 50, rng)
    z, t = cayley_inv_arrays(xi)
    np.testing.assert_allclose(jacobian_heisenberg_side(z, t, 6), jacobian_sphere_side(xi, 6), rtol=1e-12)
    np.testing.assert_allclose(cayley_arrays(z, t), xi, atol=1e-12)


def test_transfer_of_constant_is_extremal_profile(rng):
    n = 1
    Q = 4
    F = transfer_to_heisenberg(lambda x: np.ones(len(x)), n, (Q - 2) / (2 * Q))
    z = rng.normal(size=(20, 1)) + 1j * rng.normal(size=(20, 1))
    t = rng.normal(size=20)
    expected = 2.0 ** ((Q - 1) * (Q - 2) / (2 * Q)) * extremal_profile(z, t, (Q - 2) / 4)
    np.testing.assert_allclose(F(z, t), expected, rtol=1e-12)
    with pytest.raises(ValueError):
        transfer_to_heisenberg(lambda x: x, n, 0.3)


@pytest.mark.parametrize("n", [1, 2])
def test_lp_norm_of_pulled_back_constant(n):
    dim = CRDimension(n)
    F = transfer_to_heisenberg(lambda x: np.ones(len(x)), n, (dim.Q - 2) / (2 * dim.Q))
    # |J|^{(Q-2)/(2Q) q} = |J|, whose integral over H^n is the sphere area
    exact = sphere_area(n) ** (1.0 / dim.q)
    assert math.isclose(heisenberg_lp_norm(F, n, dim.q, quadrature_grid(n, 8)), exact, rel_tol=1e-12)
    assert math.isclose(heisenberg_lp_norm_direct(F, n, dim.q), exact, rel_tol=1e-6)


def test_crdimension():
    d = CRDimension(2)
    assert (d.Q, d.q, d.lambda00) == (6, 3.0, 1.0)
    assert d.theta == 1.0
    with pytest.raises(ValueError):
        CRDimension(0)


def test_sphere_area_and_monomials():
    assert math.isclose(sphere_area(1), 2 * math.pi ** 2)
    assert math.isclose(monomial_integral((0, 0), (0, 0), 1), 2 * math.pi ** 2)
    assert math.isclose(monomial_integral((1, 0), (1, 0), 1), math.pi ** 2)
    assert monomial_integral((1, 0), (0, 1), 1) == 0.0


def test_monomial_integral_monte_carlo():
    rng = np.random.default_rng(7)
    xi = random_sphere_points(1, 400000, rng)
    mc = sphere_area(1) * np.mean(np.abs(xi[:, 0]) ** 2 * np.abs(xi[:, 1]) ** 4)
    assert math.isclose(mc, monomial_integral((1, 2), (1, 2), 1), rel_tol=2e-2)


@pytest.mark.parametrize("n,deg", [(1, 8), (2, 6)])
def test_grid_exact_on_monomials(n, deg):
    grid = quadrature_grid(n, deg)
    assert math.isclose(grid.weights.sum(), sphere_area(n), rel_tol=1e-13)
    xi = grid.nodes
    for a in range(deg // 2 + 1):
        b = deg // 2 - a
        alpha = (a,) + (0,) * (n - 1) + (b,)
        vals = np.abs(xi[:, 0]) ** (2 * a) * np.abs(xi[:, -1]) ** (2 * b)
        assert math.isclose(grid.integrate(vals), monomial_integral(alpha, alpha, n), rel_tol=1e-12)


@st.composite
def polys(draw, nvars=2, max_deg=3):
    terms = {}
    for _ in range(draw(st.integers(1, 4))):
        a = tuple(draw(st.integers(0, max_deg)) for _ in range(nvars))
        b = tuple(draw(st.integers(0, max_deg)) for _ in range(nvars))
        terms[(a, b)] = complex(draw(st.floats(-2, 2)), draw(st.floats(-2, 2)))
    return ComplexPolynomial(nvars, terms)


@given(polys(), polys())
def test_product_rule(p, q):
    lhs = (p * q).d_z(0)
    rhs = p.d_z(0) * q + p * q.d_z(0)
    assert (lhs - rhs).chop(1e-10).is_zero()
    lhs = (p * q).d_zbar(1)
    rhs = p.d_zbar(1) * q + p * q.d_zbar(1)
    assert (lhs - rhs).chop(1e-10).is_zero()


@given(polys())
def test_reduce_sphere_preserves_values(p):
    xi = random_sphere_points(1, 10, np.random.default_rng(3))
    np.testing.assert_allclose(reduce_sphere(p)(xi), p(xi), atol=1e-9 * max(1.0, p.max_abs_coeff()) * 50)

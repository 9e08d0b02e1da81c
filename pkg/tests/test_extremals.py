"""Extremal functions and distances to the extremal manifolds."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crstab.extremals import (
    ExtremalField,
    ExtremalParams,
    NodalField,
    SobolevObjective,
    distance_to_hls_manifold,
    distance_to_sobolev_manifold,
    resolved_radius,
    sobolev_pairing_closed_form,
    squash,
    unsquash,
)
from crstab.harmonics import SpectralField, project, real_harmonic
from crstab.quadrature import quadrature_grid


def test_extremal_examples():
    g = ExtremalField(ExtremalParams(1.0, (0.5, 0.0)))
    assert math.isclose(float(g(np.array([[1.0, 0.0]]))[0]), 2.0)
    g0 = ExtremalField(ExtremalParams(3.0, (0.0, 0.0, 0.0)))
    np.testing.assert_allclose(g0(quadrature_grid(2, 4).nodes), 3.0)
    with pytest.raises(ValueError):
        ExtremalParams(1.0, (0.8, 0.6))


def test_extremal_derivatives_by_finite_differences():
    # T_j is tangent to the sphere, so it can be applied to the ambient formula
    # F(z) = c |1 - conj(eta).z|^{-a}: T_j F = d_j F - conj(z_j) sum_k z_k d_k F.
    g = ExtremalField(ExtremalParams(1.2, (0.3 - 0.2j, 0.1j)))
    xi = np.array([0.6 + 0.2j, np.sqrt(1 - 0.4) * np.exp(0.3j)])
    got = g.derivative_values(xi[None, :])[:, 0]
    h = 1e-6

    def F(z):
        return g.c * abs(1.0 - np.dot(z, np.conj(g.eta))) ** (-g.a)

    dz, dzb = np.zeros(2, dtype=complex), np.zeros(2, dtype=complex)
    for k in range(2):
        e = np.zeros(2, dtype=complex)
        e[k] = h
        fx = (F(xi + e) - F(xi - e)) / (2 * h)
        fy = (F(xi + 1j * e) - F(xi - 1j * e)) / (2 * h)
        dz[k] = 0.5 * (fx - 1j * fy)
        dzb[k] = 0.5 * (fx + 1j * fy)
    T = dz - np.conj(xi) * np.dot(xi, dz)
    Tb = dzb - xi * np.dot(np.conj(xi), dzb)
    np.testing.assert_allclose(got, np.concatenate([T, Tb]), atol=1e-8)


@given(st.floats(0.0, 0.7), st.floats(0.0, 0.7), st.floats(0, 6.28))
def test_pairing_closed_form_matches_quadrature(r0, r1, phase):
    eta0 = np.array([r0, 0.0], dtype=complex)
    eta = np.array([r1 * np.exp(1j * phase) * 0.6, r1 * 0.8], dtype=complex)
    grid = quadrature_grid(1, 80)
    g0 = ExtremalField(ExtremalParams(1.0, eta0))
    g = ExtremalField(ExtremalParams(1.0, eta))
    d0, d = g0.derivative_values(grid), g.derivative_values(grid)
    quad = 0.5 * grid.integrate(np.sum(d0 * np.conj(d) + np.conj(d0) * d, axis=0)).real / 2
    quad += 0.25 * grid.integrate(g0.values(grid) * g.values(grid))
    assert math.isclose(sobolev_pairing_closed_form(eta0, eta, 1), quad, rel_tol=1e-8)


def test_squash_round_trip():
    v = np.array([0.3, -2.0, 5.0, 0.1])
    eta = squash(v, 1)
    assert np.linalg.norm(eta) < 1
    np.testing.assert_allclose(squash(unsquash(eta), 1), eta, atol=1e-12)


def test_distance_of_extremal_recovers_parameters():
    params = ExtremalParams(1.7, (0.25 - 0.1j, 0.2j))
    u = ExtremalField(params)
    res = distance_to_sobolev_manifold(u, seed=1)
    assert res.squared_distance < 1e-9 * u.energy()
    assert math.isclose(res.argmin.c, params.c, rel_tol=1e-4)
    np.testing.assert_allclose(res.argmin.eta_array, params.eta_array, atol=1e-4)


def test_distance_of_projected_extremal(basis1):
    g = ExtremalField(ExtremalParams(1.0, (0.2, 0.1j)))
    u = project(g, basis1, quadrature_grid(1, 16)).real_part()
    res = distance_to_sobolev_manifold(u, seed=0)
    # truncation error only; the minimiser sits next to the true parameters
    assert res.squared_distance < 1e-4 * u.energy()
    np.testing.assert_allclose(res.argmin.eta_array, g.eta, atol=1e-2)


def test_distance_tangent_law(basis1):
    # d^2(1 + eps Y) / (eps^2 E[Y]) -> 1, with an eps^2 correction
    Y = real_harmonic(basis1, 2, 0)
    one = SpectralField.constant(basis1)
    q = []
    for eps in (1e-2, 1e-3):
        d2 = distance_to_sobolev_manifold(one + Y * eps, seed=0).squared_distance
        q.append(d2 / (eps * eps * Y.energy()))
    assert abs(q[1] - 1.0) < 1e-5
    assert abs(q[1] - 1.0) < abs(q[0] - 1.0) + 1e-9


def test_distance_determinism(basis1):
    u = SpectralField.constant(basis1) + real_harmonic(basis1, 1, 1) * 0.3
    a = distance_to_sobolev_manifold(u, seed=5)
    b = distance_to_sobolev_manifold(u, seed=5)
    assert a.to_dict() == b.to_dict()


def test_nodal_field_distance_matches_spectral(basis1):
    u = SpectralField.constant(basis1) + real_harmonic(basis1, 2, 0) * 0.2
    grid = quadrature_grid(1, 40)
    nodal = NodalField(1, grid, u.values(grid).real, u.energy())
    a = distance_to_sobolev_manifold(u, seed=0).squared_distance
    b = distance_to_sobolev_manifold(nodal, seed=0).squared_distance
    assert math.isclose(a, b, rel_tol=1e-6)
    with pytest.raises(ValueError):
        nodal.values(quadrature_grid(1, 8))


def test_resolved_radius_grows_with_degree():
    assert resolved_radius(quadrature_grid(1, 16)) <= resolved_radius(quadrature_grid(1, 40))


def test_objective_rejects_other_types():
    with pytest.raises(TypeError):
        SobolevObjective(np.ones(3))


def test_hls_distance_of_hls_extremal():
    h = ExtremalField(ExtremalParams(1.0, (0.3, 0.1j)), "hls")
    grid = quadrature_grid(1, 24)
    res = distance_to_hls_manifold(h, grid=grid, seed=0)
    assert res.squared_distance < 1e-6

"""Energies, sharp constants and Sobolev deficits."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crstab.extremals import ExtremalField, ExtremalParams, heisenberg_extremal, heisenberg_extremal_on_sphere
from crstab.functionals import (
    duality_identity_sides,
    energy,
    heisenberg_deficit,
    hls_heisenberg_constant,
    perturbative_deficit,
    sharp_constants,
    sobolev_deficit,
)
from crstab.harmonics import Measure, SpectralField, real_harmonic
from crstab.heisenberg import HPoint, transfer_to_heisenberg
from crstab.quadrature import quadrature_grid, sphere_area


def test_constants_for_n1():
    sc = sharp_constants(1)
    assert math.isclose(sc.heisenberg_sobolev, 2 * math.pi, rel_tol=1e-14)
    assert math.isclose(sc.hls_SQ, 4 * math.sqrt(2), rel_tol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_constant_identities(n):
    Q = 2 * n + 2
    sc = sharp_constants(n)
    scaled = sc.hls_SQ * 2.0 ** (-n * (Q - 2) / Q)
    assert math.isclose(scaled, hls_heisenberg_constant(n, Q - 2), rel_tol=1e-12)
    lhs, rhs = duality_identity_sides(n)
    assert math.isclose(lhs, rhs, rel_tol=1e-12)


def test_energy_of_constant(basis1):
    assert math.isclose(energy(SpectralField.constant(basis1)), 0.25 * 2 * math.pi ** 2, rel_tol=1e-14)


def test_extremal_energy_closed_form_vs_quadrature():
    g = ExtremalField(ExtremalParams(1.3, (0.2 + 0.1j, -0.3)))
    grid = quadrature_grid(1, 40)
    assert math.isclose(g.energy(), g.energy(grid), rel_tol=1e-9)


def test_deficit_of_constant_is_zero(basis1, basis2):
    for b in (basis1, basis2):
        rep = sobolev_deficit(SpectralField.constant(b, 2.0))
        assert abs(rep.deficit) < 1e-10 * rep.energy


def test_deficit_of_extremal_is_zero():
    rep = sobolev_deficit(ExtremalField(ExtremalParams(2.0, (0.3, 0.1j))))
    assert abs(rep.deficit) < 1e-8


def test_deficit_positive_off_manifold(basis1):
    u = SpectralField.constant(basis1) + real_harmonic(basis1, 2, 0) * 0.1
    assert sobolev_deficit(u).deficit > 0


def test_zero_field_rejected(basis1):
    with pytest.raises(ValueError):
        sobolev_deficit(SpectralField.zero(basis1))


def test_measure_conventions_agree(basis1):
    u = SpectralField.constant(basis1) + real_harmonic(basis1, 1, 1) * 0.3
    s = sobolev_deficit(u, measure=Measure.SURFACE)
    p = sobolev_deficit(u, measure=Measure.PROBABILITY)
    assert math.isclose(s.deficit, sphere_area(1) * p.deficit, rel_tol=1e-12)


@given(st.floats(0.1, 10))
def test_deficit_is_two_homogeneous(c):
    from crstab.harmonics import build_basis

    b = build_basis(1, 2)
    u = SpectralField.constant(b) + real_harmonic(b, 2, 0) * 0.3
    assert math.isclose(sobolev_deficit(u * c).deficit, c * c * sobolev_deficit(u).deficit, rel_tol=1e-10)


def test_perturbative_deficit_matches_direct(basis2):
    r = real_harmonic(basis2, 2, 1) * 0.2 + real_harmonic(basis2, 0, 2) * 0.1
    direct = sobolev_deficit(SpectralField.constant(basis2) + r, measure=Measure.PROBABILITY).deficit
    assert math.isclose(perturbative_deficit(r), direct, rel_tol=1e-10)


def test_heisenberg_extremal_values():
    a = HPoint.identity(1)
    f = heisenberg_extremal("H", 1.0, 1.0, a)
    assert math.isclose(float(f(np.zeros((1, 1)), np.zeros(1))[0]), 1.0)
    assert math.isclose(float(f(np.zeros((1, 1)), np.ones(1))[0]), 2.0 ** -0.5)
    with pytest.raises(ValueError):
        heisenberg_extremal("H", 1.0, 0.0, a)


@pytest.mark.parametrize("kind", ["H", "F"])
def test_heisenberg_extremal_pullback_matches(kind, rng):
    n, Q = 1, 4
    a = HPoint([0.4 - 0.2j], 0.7)
    g = heisenberg_extremal_on_sphere(1.5, 0.8, a, kind)
    w = (Q - 2) / (2 * Q) if kind == "H" else (Q + 2) / (2 * Q)
    F = transfer_to_heisenberg(g, n, w)
    z = rng.normal(size=(30, 1)) + 1j * rng.normal(size=(30, 1))
    t = rng.normal(size=30)
    np.testing.assert_allclose(F(z, t), heisenberg_extremal(kind, 1.5, 0.8, a)(z, t), rtol=1e-10)


def test_heisenberg_deficit_of_pullbacks():
    rng = np.random.default_rng(4)
    for _ in range(5):
        a = HPoint(rng.normal(size=1) * 0.5 + 1j * rng.normal(size=1) * 0.5, rng.normal() * 0.5)
        g = heisenberg_extremal_on_sphere(rng.uniform(0.5, 2), rng.uniform(0.6, 1.6), a)
        rep = heisenberg_deficit(g, 0.25)
        assert abs(rep.deficit) < 1e-7 * rep.energy
    with pytest.raises(ValueError):
        heisenberg_deficit(g, 0.75)

"""Sobolev energy, sharp constants and deficits on S^{2n+1} and H^n."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .extremals import ExponentKind, ExtremalField
from .harmonics import Measure, NormalizationContext, SpectralField
from .heisenberg import CRDimension
from .quadrature import QuadratureGrid, aligned_grid, quadrature_grid, sphere_area


@dataclass
class DeficitReport:
    energy: float
    rhs_term: float
    deficit: float
    measure_convention: str
    lq_norm: float
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def scaled(self, factor: float, label: str) -> "DeficitReport":
        prov = dict(self.provenance, scaling=label, factor=factor)
        return DeficitReport(
            self.energy * factor, self.rhs_term * factor, self.deficit * factor, self.measure_convention, self.lq_norm, prov
        )


@dataclass(frozen=True)
class SharpConstants:
    n: int
    heisenberg_sobolev: float
    sphere_sobolev_factor: float
    hls_SQ: float
    hls_heisenberg: float

    def to_dict(self) -> dict:
        return asdict(self)


def heisenberg_sobolev_constant(n: int) -> float:
    """4 pi n^2 / (2^{2n} n!)^{1/(n+1)}."""
    return 4.0 * math.pi * n * n / (2.0 ** (2 * n) * math.factorial(n)) ** (1.0 / (n + 1))


def sphere_sobolev_factor(n: int) -> float:
    """|S^{2n+1}|^{2/Q} ((Q-2)/4)^2, the constant in front of ||u||_q^2 (surface measure)."""
    Q = 2 * n + 2
    return sphere_area(n) ** (2.0 / Q) * ((Q - 2) / 4.0) ** 2


def hls_sphere_constant(n: int) -> float:
    """S_Q = |S^{2n+1}|^{(Q-2)/Q} n! / Gamma^2((Q+2)/4)."""
    Q = 2 * n + 2
    return sphere_area(n) ** ((Q - 2.0) / Q) * math.factorial(n) / math.gamma((Q + 2) / 4.0) ** 2


def hls_heisenberg_constant(n: int, lam: Optional[float] = None) -> float:
    """(pi^{n+1} / (2^{n-1} n!))^{lam/Q} n! Gamma((Q-lam)/2) / Gamma^2((2Q-lam)/4)."""
    Q = 2 * n + 2
    lam = Q - 2 if lam is None else lam
    base = math.pi ** (n + 1) / (2.0 ** (n - 1) * math.factorial(n))
    return base ** (lam / Q) * math.factorial(n) * math.gamma((Q - lam) / 2.0) / math.gamma((2 * Q - lam) / 4.0) ** 2


def sharp_constants(n: int) -> SharpConstants:
    return SharpConstants(
        n=n,
        heisenberg_sobolev=heisenberg_sobolev_constant(n),
        sphere_sobolev_factor=sphere_sobolev_factor(n),
        hls_SQ=hls_sphere_constant(n),
        hls_heisenberg=hls_heisenberg_constant(n),
    )


def duality_identity_sides(n: int):
    """Both sides of |S|^{-2/Q}((Q-2)/4)^{-2} (Gamma^2((Q-2)/4)/(2 pi^{n+1}))^{-1} = |S|^{(Q-2)/Q} n!/Gamma^2((Q+2)/4)."""
    Q = 2 * n + 2
    S = sphere_area(n)
    lhs = S ** (-2.0 / Q) * ((Q - 2) / 4.0) ** -2 / (math.exp(2 * gammaln((Q - 2) / 4.0)) / (2 * math.pi ** (n + 1)))
    rhs = S ** ((Q - 2.0) / Q) * math.factorial(n) / math.exp(2 * gammaln((Q + 2) / 4.0))
    return lhs, rhs


def heisenberg_gradient_factor(n: int) -> float:
    """int |grad F|^2 on H^n equals this factor times E[u] on the sphere."""
    return 2.0 ** (2.0 + 1.0 / (n + 1))


# -- energy ------------------------------------------------------------------

def energy(u, grid: Optional[QuadratureGrid] = None, measure: Measure = Measure.SURFACE) -> float:
    """E[u] = (1/2) int sum |T_j u|^2 + |Tbar_j u|^2 + (n^2/4) int |u|^2.

    SpectralField without a grid: the spectral sum; with a grid: quadrature.
    ExtremalField: closed form without a grid, quadrature of the analytic density with one.
    """
    ctx = NormalizationContext(u.n, measure)
    if isinstance(u, SpectralField):
        if grid is None:
            return ctx.integral(u.energy())
        d = u.derivative_values(grid)
        dens = 0.5 * np.sum(np.abs(d) ** 2, axis=0) + u.n ** 2 / 4.0 * np.abs(u.values(grid)) ** 2
        return ctx.integral(float(grid.integrate(dens)))
    if isinstance(u, ExtremalField):
        return ctx.integral(u.energy(grid))
    raise TypeError("energy needs a SpectralField or an ExtremalField")


def default_grid(u, oversample: Optional[int] = None) -> QuadratureGrid:
    """Grid for |u|^q: exact for the polynomial case up to degree ceil(q) D."""
    if isinstance(u, SpectralField):
        q = CRDimension(u.n).q
        factor = oversample or int(math.ceil(q))
        return quadrature_grid(u.n, factor * u.basis.D)
    if isinstance(u, ExtremalField):
        return aligned_grid(u.n, u.eta, 4)
    raise TypeError("no default grid for this field type")


def _values(u, grid):
    v = u.values(grid)
    return np.real(v)


def lq_integral(u, p: float, grid: QuadratureGrid) -> float:
    return float(grid.integrate(np.abs(_values(u, grid)) ** p))


def sobolev_deficit(
    u,
    grid: Optional[QuadratureGrid] = None,
    measure: Measure = Measure.SURFACE,
    energy_grid: Optional[QuadratureGrid] = None,
) -> DeficitReport:
    """E[u] - lambda00 |S|^{2/Q} ||u||_q^2 (surface) or E[u] - lambda00 ||u||_q^2 (probability)."""
    dim = CRDimension(u.n)
    grid = grid or default_grid(u)
    if isinstance(u, ExtremalField) and energy_grid is None:
        energy_grid = grid
    E = energy(u, energy_grid, Measure.SURFACE)
    Iq = lq_integral(u, dim.q, grid)
    if Iq <= 0:
        raise ValueError("zero field: the critical norm vanishes")
    ctx = NormalizationContext(u.n, measure)
    lq = ctx.integral(Iq) ** (1.0 / dim.q)
    if measure == Measure.SURFACE:
        rhs = dim.lambda00 * sphere_area(u.n) ** (2.0 / dim.Q) * lq * lq
    else:
        rhs = dim.lambda00 * lq * lq
    En = ctx.integral(E)
    return DeficitReport(
        energy=En,
        rhs_term=rhs,
        deficit=En - rhs,
        measure_convention=Measure(measure).value,
        lq_norm=lq,
        provenance={
            "n": u.n,
            "basis_degree": getattr(getattr(u, "basis", None), "D", None),
            "grid_exactness": grid.degree,
            "grid_nodes": len(grid),
            "energy_method": "quadrature" if energy_grid is not None else "spectral/closed-form",
        },
    )


def perturbative_deficit(r: SpectralField, grid: Optional[QuadratureGrid] = None) -> float:
    """Probability-measure deficit of 1 + r evaluated without catastrophic cancellation.

    E_p[1 + r] = lambda00 (1 + 2 mean r) + E_p[r] for real r, and
    (int (1+r)^q)^{2/q} - 1 = expm1((2/q) log1p(int expm1(q log1p r))).
    """
    dim = CRDimension(r.n)
    grid = grid or default_grid(r)
    rv = _values(r, grid)
    if np.any(rv <= -1.0):
        pw = np.abs(1.0 + rv) ** dim.q - 1.0
    else:
        pw = np.expm1(dim.q * np.log1p(rv))
    J = float(grid.integrate(pw)) / sphere_area(r.n)
    lam = dim.lambda00
    mean = float(np.real(r.mean(Measure.PROBABILITY)))
    Er = r.energy() / sphere_area(r.n)
    return 2.0 * lam * mean + Er - lam * math.expm1((2.0 / dim.q) * math.log1p(J))


def heisenberg_deficit(u, weight_exponent, grid: Optional[QuadratureGrid] = None) -> DeficitReport:
    """Deficit of F = |J_C|^{(Q-2)/(2Q)} u o C^{-1} on H^n, from sphere data.

    int |grad F|^2 = 2^{2+1/(n+1)} E[u] and ||F||_q = ||u||_q, while the
    Heisenberg constant equals 2^{2+1/(n+1)} lambda00 |S|^{2/Q}, so the whole
    report is the surface-measure sphere report times 2^{2+1/(n+1)}.
    """
    from fractions import Fraction

    Q = 2 * u.n + 2
    if Fraction(weight_exponent).limit_denominator(10 ** 6) != Fraction(Q - 2, 2 * Q):
        raise ValueError(f"the Sobolev pullback uses weight exponent (Q-2)/(2Q) = {Fraction(Q - 2, 2 * Q)}")
    rep = sobolev_deficit(u, grid, Measure.SURFACE)
    out = rep.scaled(heisenberg_gradient_factor(u.n), "heisenberg")
    out.measure_convention = "heisenberg-lebesgue"
    return out

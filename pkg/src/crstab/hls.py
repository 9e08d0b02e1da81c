"""Hardy-Littlewood-Sobolev energy on S^{2n+1}, its sharp deficit and the Legendre-duality constant.

The kernel |1 - zeta.conj(eta)|^{-2 alpha} acts diagonally on bispherical
harmonics with eigenvalues

    E_{j,k} = 2 pi^{n+1} Gamma(n+1-2a) Gamma(j+a) Gamma(k+a)
              / (Gamma(a)^2 Gamma(j+n+1-a) Gamma(k+n+1-a)),

so HLS energies of band-limited fields are diagonal sums.  At a = (Q-2)/4 the
kernel operator is a multiple of the inverse conformal sublaplacian.

The double-integral oracle rotates zeta to e_1 and writes the first coordinate
of eta as w = 1 - t e^{i psi}.  The pushforward of surface measure,
(1 - |w|^2)^{n-1} dA(w) times the measure of the fibre sphere S^{2n-1}, then
contributes t^{n-1}(2 cos psi - t)^{n-1}, and with dA = t dt dpsi the kernel
singularity |1 - w|^{-2a} = t^{-2a} is integrated by Gauss-Jacobi in t with
weight t^{n-2a}.  Rescaling t to [0, 1] leaves cos(psi)^{n-2a+1}, which a
second Gauss-Jacobi rule in psi absorbs.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln, gammasgn, roots_jacobi

from .extremals import (
    ExponentKind,
    ExtremalField,
    ExtremalParams,
    distance_to_hls_manifold,
)
from .functionals import DeficitReport
from .harmonics import Measure, SpectralField, eigenvalue
from .heisenberg import CRDimension
from .quadrature import (
    QuadratureGrid,
    aligned_grid,
    quadrature_grid,
    sphere_area,
    unitary_with_first_column,
)


# -- kernel spectrum -----------------------------------------------------------

def _log_abs_gamma(x: float):
    return float(gammaln(x)), float(gammasgn(x))


def kernel_eigenvalue(j: int, k: int, alpha: float, n: int) -> float:
    """Eigenvalue of the operator with kernel |1 - zeta.conj(eta)|^{-2 alpha} on H_{j,k}."""
    if not -1.0 < alpha < (n + 1) / 2.0:
        raise ValueError(f"alpha must lie in (-1, {(n + 1) / 2})")
    if j < 0 or k < 0:
        raise ValueError("bidegree must be nonnegative")
    if alpha == 0.0:
        # constant kernel: only the mean survives
        return sphere_area(n) if j == k == 0 else 0.0
    num = [n + 1 - 2 * alpha, j + alpha, k + alpha]
    den = [alpha, alpha, j + n + 1 - alpha, k + n + 1 - alpha]
    logv, sign = math.log(2.0) + (n + 1) * math.log(math.pi), 1.0
    for x in num:
        if x <= 0 and float(x).is_integer():
            return 0.0 if x != n + 1 - 2 * alpha else math.inf
        lg, sg = _log_abs_gamma(x)
        logv += lg
        sign *= sg
    for x in den:
        lg, sg = _log_abs_gamma(x)
        logv -= lg
        sign *= sg
    return sign * math.exp(logv)


def sobolev_alpha(n: int) -> float:
    """alpha = (Q-2)/4, the exponent of the kernel dual to the Sobolev energy."""
    return n / 2.0


def inverse_constant(n: int) -> float:
    """Gamma^2((Q-2)/4) / (2 pi^{n+1}): L^{-1} = this constant times the kernel operator."""
    return math.exp(2.0 * gammaln(n / 2.0)) / (2.0 * math.pi ** (n + 1))


@dataclass
class KernelSpectrum:
    n: int
    alpha: float
    D: int
    table: dict = field(default_factory=dict)

    @classmethod
    def build(cls, n: int, alpha: float, D: int) -> "KernelSpectrum":
        table = {(j, d - j): kernel_eigenvalue(j, d - j, alpha, n) for d in range(D + 1) for j in range(d + 1)}
        return cls(n, alpha, D, table)

    def duality_residuals(self) -> dict:
        """E_{j,k} Gamma^2((Q-2)/4)/(2 pi^{n+1}) - 1/lambda_{j,k}, relative to 1/lambda (alpha = (Q-2)/4 only)."""
        if abs(self.alpha - sobolev_alpha(self.n)) > 1e-15:
            raise ValueError("duality holds at alpha = (Q-2)/4 only")
        c = inverse_constant(self.n)
        return {
            jk: (E * c - 1.0 / eigenvalue(*jk, self.n)) * eigenvalue(*jk, self.n) for jk, E in self.table.items()
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["j", "k", "alpha", "E"])
        for (j, k), E in sorted(self.table.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0])):
            w.writerow([j, k, repr(self.alpha), repr(E)])
        return buf.getvalue()


# -- energies --------------------------------------------------------------------

def _basis_kernel_weights(basis, alpha: float) -> np.ndarray:
    return np.array([kernel_eigenvalue(j, k, alpha, basis.n) for j, k, _ in basis.labels])


def hls_energy(g, lam: Optional[float] = None) -> float:
    """double integral of g(zeta) conj(g(eta)) |1 - zeta.conj(eta)|^{-lam/2} (surface measure).

    SpectralField: sum_{j,k} E_{j,k} ||pi_{j,k} g||^2.  A Sobolev-exponent HLS
    extremal c |1 - conj(eta).xi|^{-(Q+2)/2} at lam = Q - 2 uses the identity
    L^{-1} h = h_sob / (lambda00 (1 - rho^2)) with h_sob = |1 - conj(eta).xi|^{-n},
    reducing the double integral to one quadrature on a grid aligned with eta.
    """
    n = g.n
    Q = 2 * n + 2
    lam = Q - 2.0 if lam is None else float(lam)
    alpha = lam / 4.0
    if isinstance(g, SpectralField):
        w = _basis_kernel_weights(g.basis, alpha)
        return float(np.sum(w * np.abs(g.coeffs) ** 2))
    if isinstance(g, ExtremalField) and g.kind == ExponentKind.HLS:
        if abs(lam - (Q - 2)) > 1e-14:
            raise ValueError("closed-form extremal energies are available at lam = Q - 2 only")
        dim = CRDimension(n)
        rho2 = float(np.sum(np.abs(g.eta) ** 2))
        grid = aligned_grid(n, g.eta, 4)
        sob = ExtremalField(ExtremalParams(1.0, tuple(g.eta)))
        Linv = np.real(sob.values(grid)) / (dim.lambda00 * (1.0 - rho2))
        # kernel operator = L^{-1} / inverse_constant
        return g.c * float(grid.integrate(np.real(g.values(grid)) * Linv)) / inverse_constant(n)
    raise TypeError("hls_energy needs a SpectralField or an HLS-exponent ExtremalField")


def _fibre_rule(n: int, points: int):
    """Nodes (M, n) on S^{2n-1} and weights summing to |S^{2n-1}|."""
    if n == 1:
        phi = 2.0 * np.pi * np.arange(points) / points
        return np.exp(1j * phi)[:, None], np.full(points, 2.0 * np.pi / points)
    g = quadrature_grid(n - 1, 2 * points)
    return g.nodes, g.weights


def kernel_apply_quadrature(
    f,
    n: int,
    points: np.ndarray,
    alpha: float,
    t_points: int = 24,
    psi_points: int = 48,
    fibre_points: int = 24,
) -> np.ndarray:
    """int f(eta) |1 - zeta.conj(eta)|^{-2 alpha} d eta at each zeta in points, by singularity-adapted quadrature.

    f is a callable on (M, n+1) arrays of sphere points.
    """
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    beta = n - 2.0 * alpha  # exponent left on t after the measure and kernel combine
    if beta <= -1.0:
        raise ValueError("kernel not integrable")
    xj, wj = roots_jacobi(t_points, 0.0, beta)  # weight (1 + x)^beta on [-1, 1]
    # the t-substitution leaves cos(psi)^{beta+1}; with psi = pi x / 2 this is
    # (1 - x^2)^{beta+1} times a smooth positive factor, so use Gauss-Jacobi in x
    gam = beta + 1.0
    xl, wl = roots_jacobi(psi_points, gam, gam)
    psi = 0.5 * np.pi * xl
    wpsi = 0.5 * np.pi * wl * (np.cos(psi) / (1.0 - xl * xl)) ** gam
    fib, wfib = _fibre_rule(n, fibre_points)
    out = np.empty(points.shape[0], dtype=complex)
    for idx, zeta in enumerate(points):
        U = unitary_with_first_column(zeta)
        total = 0.0 + 0.0j
        for ps, wp in zip(psi, wpsi):
            tmax = 2.0 * math.cos(ps)
            # t = tmax (1 + x)/2, t^beta dt = (tmax/2)^{beta+1} (1+x)^beta dx
            t = 0.5 * tmax * (1.0 + xj)
            wt = wj  # the factor (tmax/2)^{beta+1} = cos(psi)^{beta+1} sits in wpsi
            w = 1.0 - t * np.exp(1j * ps)
            radial = (tmax - t) ** (n - 1)  # (2 cos psi - t)^{n-1}
            rest = np.sqrt(np.maximum(1.0 - np.abs(w) ** 2, 0.0))
            # local points: (w, rest * fibre)
            loc = np.empty((t.size, fib.shape[0], n + 1), dtype=complex)
            loc[:, :, 0] = w[:, None]
            loc[:, :, 1:] = rest[:, None, None] * fib[None, :, :]
            glob = loc.reshape(-1, n + 1) @ U.T
            vals = np.asarray(f(glob)).reshape(t.size, fib.shape[0])
            inner = vals @ wfib
            total += wp * np.sum(wt * radial * inner)
        out[idx] = total
    return out


def hls_energy_quadrature(g: SpectralField, lam: Optional[float] = None, outer_degree: Optional[int] = None, **kw) -> float:
    """Oracle: the HLS double integral by an outer product rule and the singular-adapted inner rule."""
    n = g.n
    Q = 2 * n + 2
    lam = Q - 2.0 if lam is None else float(lam)
    outer = quadrature_grid(n, outer_degree or 2 * g.basis.D)
    inner = kernel_apply_quadrature(g, n, outer.nodes, lam / 4.0, **kw)
    return float(np.real(outer.integrate(np.conj(g.values(outer)) * inner)))


def inverse_sublaplacian(v: SpectralField) -> SpectralField:
    """L^{-1} v, coefficient-wise division by lambda_{j,k}."""
    return v.apply_L_inverse()


def inverse_sublaplacian_quadrature(v, n: int, points: np.ndarray, **kw) -> np.ndarray:
    """Gamma^2((Q-2)/4)/(2 pi^{n+1}) int v(eta) |1 - zeta.conj(eta)|^{-(Q-2)/2} d eta at the given points."""
    return inverse_constant(n) * kernel_apply_quadrature(v, n, points, sobolev_alpha(n), **kw)


# -- deficit ---------------------------------------------------------------------

def hls_norm_exponent(n: int) -> float:
    Q = 2 * n + 2
    return 2.0 * Q / (Q + 2.0)


def hls_deficit_constant(n: int) -> float:
    """|S^{2n+1}|^{(2-Q)/Q} Gamma^2((Q+2)/4) / n!."""
    Q = 2 * n + 2
    return sphere_area(n) ** ((2.0 - Q) / Q) * math.exp(2.0 * gammaln((Q + 2) / 4.0)) / math.factorial(n)


def _default_norm_grid(g) -> QuadratureGrid:
    if isinstance(g, ExtremalField):
        return aligned_grid(g.n, g.eta, 4)
    return quadrature_grid(g.n, max(24, 4 * g.basis.D) if g.n == 1 else max(16, 3 * g.basis.D))


def hls_deficit(g, grid: Optional[QuadratureGrid] = None) -> DeficitReport:
    """||g||_p^2 - |S|^{(2-Q)/Q} Gamma^2((Q+2)/4)/n! * HLS energy, p = 2Q/(Q+2) (surface measure)."""
    n = g.n
    if isinstance(g, SpectralField) and g.realness_defect() > 1e-12:
        raise ValueError("the HLS deficit is defined for real fields")
    p = hls_norm_exponent(n)
    grid = grid or _default_norm_grid(g)
    vals = np.real(g.values(grid))
    Ip = float(grid.integrate(np.abs(vals) ** p))
    if Ip <= 0:
        raise ValueError("zero field: the HLS norm vanishes")
    lp = Ip ** (1.0 / p)
    rhs = hls_deficit_constant(n) * hls_energy(g)
    return DeficitReport(
        energy=lp * lp,
        rhs_term=rhs,
        deficit=lp * lp - rhs,
        measure_convention=Measure.SURFACE.value,
        lq_norm=lp,
        provenance={
            "n": n,
            "kind": "hls",
            "norm_exponent": p,
            "grid_exactness": grid.degree,
            "grid_nodes": len(grid),
            "basis_degree": getattr(getattr(g, "basis", None), "D", None),
        },
    )


# -- Legendre duality ----------------------------------------------------------------

def legendre_dual_constant(beta: float, Q: int) -> float:
    """min{4 beta (Q+2)/(Q(Q-2)), 1} (Q+2)/(2(Q-2))."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return min(4.0 * beta * (Q + 2) / (Q * (Q - 2.0)), 1.0) * (Q + 2) / (2.0 * (Q - 2.0))


@dataclass
class HLSStabilityReport:
    n: int
    beta: float
    deficit: float
    squared_distance: float
    ratio: Optional[float]
    dual_constant: float
    conditional_holds: Optional[bool]
    distance_argmin: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def hls_stability_check(g: SpectralField, beta: float, seed: int = 0, restarts: int = 8, tol: float = 1e-8) -> HLSStabilityReport:
    """Deficit, squared L^p distance to the HLS extremals and their ratio.

    The comparison with legendre_dual_constant(beta, Q) is conditional on beta
    being a valid Sobolev stability constant, which is an input here.
    """
    n = g.n
    rep = hls_deficit(g)
    dist = distance_to_hls_manifold(g, seed=seed, restarts=restarts)
    d2 = dist.squared_distance
    scale = rep.energy
    if d2 <= tol * scale:
        ratio, holds = None, None
    else:
        ratio = rep.deficit / d2
        holds = bool(ratio >= legendre_dual_constant(beta, 2 * n + 2))
    return HLSStabilityReport(
        n=n,
        beta=beta,
        deficit=rep.deficit,
        squared_distance=d2,
        ratio=ratio,
        dual_constant=legendre_dual_constant(beta, 2 * n + 2),
        conditional_holds=holds,
        distance_argmin=dist.argmin.to_dict(),
    )

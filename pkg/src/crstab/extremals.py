"""Extremal functions c |1 - conj(eta).xi|^{-a} and distances to their manifolds.

Derivatives used for energies, with w = 1 - conj(eta).xi, p = conj(eta).xi = 1 - w,
rho = |eta| and g = |w|^{-a}:

    T_j g    = (a/2) (g / w)    (conj(eta_j) - conj(xi_j) p)
    Tbar_j g = (a/2) (g / wbar) (eta_j - xi_j conj(p))
    sum_j |conj(eta_j) - conj(xi_j) p|^2 = rho^2 - |p|^2      (on the sphere)

so the energy density (1/2) sum (|T_j g|^2 + |Tbar_j g|^2) + (n^2/4) g^2 equals
(a/2)^2 g^2 (rho^2 - |p|^2) / |w|^2 + (n^2/4) g^2.

For the Sobolev exponent a = n one has L g = (n^2/4)(1 - rho^2) g^{q-1}, hence
E[g] = (n^2/4) |S| (1 - rho^2)^{-n} and int g^q = |S| (1 - rho^2)^{-(n+1)}.
The E-pairing of two Sobolev extremals is, by conformal invariance,

    <g_eta0, g_eta>_E = (n^2/4) |S| |1 - <eta, eta0>|^{-n} 2F1(n/2, n/2; n+1; rho'^2),
    1 - rho'^2 = (1 - |eta0|^2)(1 - |eta|^2) / |1 - <eta, eta0>|^2.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import hyp2f1

from .harmonics import HarmonicBasis, SpectralField, lp_norm
from .heisenberg import CRDimension, HPoint
from .quadrature import QuadratureGrid, aligned_grid, sphere_area
from .zonal import ZonalProjector

ETA_CAP = 0.995


class ExponentKind(str, Enum):
    SOBOLEV = "sobolev"
    HLS = "hls"


def exponent_value(kind: ExponentKind | str, n: int) -> float:
    dim = CRDimension(n)
    return dim.sobolev_exponent if ExponentKind(kind) == ExponentKind.SOBOLEV else dim.hls_exponent


@dataclass(frozen=True)
class ExtremalParams:
    c: float
    eta: tuple

    def __post_init__(self):
        eta = tuple(complex(x) for x in np.atleast_1d(self.eta))
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "c", float(self.c))
        if self.rho >= 1.0:
            raise ValueError(f"|eta| must be < 1, got {self.rho}")

    @property
    def eta_array(self) -> np.ndarray:
        return np.array(self.eta, dtype=complex)

    @property
    def rho(self) -> float:
        return float(np.linalg.norm(np.array(self.eta, dtype=complex)))

    @property
    def n(self) -> int:
        return len(self.eta) - 1

    def to_dict(self) -> dict:
        return {"c": self.c, "eta_re": [z.real for z in self.eta], "eta_im": [z.imag for z in self.eta]}


class ExtremalField:
    """Point-evaluable c |1 - conj(eta).xi|^{-a} with analytic CR derivatives."""

    def __init__(self, params: ExtremalParams, kind: ExponentKind | str = ExponentKind.SOBOLEV):
        self.params = params
        self.kind = ExponentKind(kind)
        self.n = params.n
        self.a = exponent_value(self.kind, self.n)

    @property
    def c(self) -> float:
        return self.params.c

    @property
    def eta(self) -> np.ndarray:
        return self.params.eta_array

    def scaled(self, s: float) -> "ExtremalField":
        return ExtremalField(ExtremalParams(self.c * s, self.params.eta), self.kind)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        w = 1.0 - np.asarray(points, dtype=complex) @ np.conj(self.eta)
        return self.c * np.abs(w) ** (-self.a)

    def values(self, grid: QuadratureGrid) -> np.ndarray:
        return self(grid.nodes)

    def derivative_values(self, grid_or_points) -> np.ndarray:
        """Stack (T_1 g, ..., T_{n+1} g, Tbar_1 g, ..., Tbar_{n+1} g)."""
        xi = grid_or_points.nodes if isinstance(grid_or_points, QuadratureGrid) else np.asarray(grid_or_points)
        eta = self.eta
        p = xi @ np.conj(eta)
        w = 1.0 - p
        g = self.c * np.abs(w) ** (-self.a)
        half = self.a / 2.0
        T = half * (g / w)[None, :] * (np.conj(eta)[:, None] - np.conj(xi).T * p[None, :])
        Tb = half * (g / np.conj(w))[None, :] * (eta[:, None] - xi.T * np.conj(p)[None, :])
        return np.concatenate([T, Tb], axis=0)

    def energy_density(self, grid: QuadratureGrid) -> np.ndarray:
        xi = grid.nodes
        eta = self.eta
        p = xi @ np.conj(eta)
        w = 1.0 - p
        g = self.c * np.abs(w) ** (-self.a)
        rho2 = float(np.sum(np.abs(eta) ** 2))
        lam = self.n ** 2 / 4.0
        grad = (self.a / 2.0) ** 2 * g * g * np.clip(rho2 - np.abs(p) ** 2, 0.0, None) / np.abs(w) ** 2
        return grad + lam * g * g

    def energy(self, grid: Optional[QuadratureGrid] = None) -> float:
        """E[g] in surface measure: quadrature of the analytic density if a grid is given."""
        if grid is not None:
            return float(grid.integrate(self.energy_density(grid)))
        if self.kind != ExponentKind.SOBOLEV:
            raise ValueError("closed-form energy is available for the Sobolev exponent only")
        n = self.n
        return self.c ** 2 * n * n / 4.0 * sphere_area(n) * (1.0 - self.params.rho ** 2) ** (-n)

    def default_grid(self, degree: int = 8) -> QuadratureGrid:
        return aligned_grid(self.n, self.eta, degree)


def extremal_field(params: ExtremalParams, exponent_kind: ExponentKind | str = ExponentKind.SOBOLEV) -> ExtremalField:
    return ExtremalField(params, exponent_kind)


def sobolev_pairing_closed_form(eta0: np.ndarray, eta: np.ndarray, n: int) -> float:
    """<g_eta0, g_eta>_E for unit-amplitude Sobolev extremals."""
    eta0 = np.asarray(eta0, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    w = 1.0 - np.vdot(eta0, eta)  # 1 - <eta, eta0>
    aw2 = abs(w) ** 2
    one_minus = (1.0 - np.vdot(eta0, eta0).real) * (1.0 - np.vdot(eta, eta).real) / aw2
    rp2 = min(max(1.0 - one_minus, 0.0), 1.0)
    return n * n / 4.0 * sphere_area(n) * aw2 ** (-n / 2.0) * float(hyp2f1(n / 2.0, n / 2.0, n + 1.0, rp2))


# -- Heisenberg extremals ------------------------------------------------------

class HKind(str, Enum):
    H = "H"
    F = "F"


def heisenberg_extremal(kind: HKind | str, c: float, delta: float, a: HPoint):
    """c * H(delta(a^{-1} u)) or c * F(delta(a^{-1} u)) as a callable of (z, t) arrays."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    kind = HKind(kind)
    n = a.n
    Q = 2 * n + 2
    power = (Q - 2) / 4.0 if kind == HKind.H else (Q + 2) / 4.0
    za, ta = a.z, a.t

    def f(z, t):
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        # a^{-1} u = (z - z_a, t - t_a - 2 Im(z_a . conj(z)))
        dz = z - za
        dt = t - ta - 2.0 * np.imag(np.sum(za * np.conj(z), axis=-1))
        r2 = np.sum(np.abs(delta * dz) ** 2, axis=-1)
        return c * ((1.0 + r2) ** 2 + (delta * delta * dt) ** 2) ** (-power)

    return f


def heisenberg_extremal_on_sphere(c: float, delta: float, a: HPoint, kind: HKind | str = HKind.H) -> ExtremalField:
    """Sphere pullback |J_C|^{-w} (c H(delta(a^{-1}.))) o C^{-1} as a sphere extremal.

    With w_a = |z_a|^2 + i t_a and A0 = (1 + delta^2 + delta^2 w_a)/2:
        conj(eta_{n+1}) = -(1 - delta^2 + delta^2 w_a) / (1 + delta^2 + delta^2 w_a)
        conj(eta_j)     = 2 delta^2 conj(z_{a,j}) / (1 + delta^2 + delta^2 w_a)
    and the amplitude is c 2^{-(Q-1)w'} |A0|^{-a} with a the sphere exponent.
    Here w' = (Q-2)/(2Q) for H and (Q+2)/(2Q) for F.
    """
    kind = HKind(kind)
    n = a.n
    Q = 2 * n + 2
    d2 = delta * delta
    wa = float(np.sum(np.abs(a.z) ** 2)) + 1j * a.t
    den = 1.0 + d2 + d2 * wa
    eta_bar = np.empty(n + 1, dtype=complex)
    eta_bar[:-1] = 2.0 * d2 * np.conj(a.z) / den
    eta_bar[-1] = -(1.0 - d2 + d2 * wa) / den
    A0 = 0.5 * den
    if kind == HKind.H:
        expo, weight, ek = (Q - 2) / 2.0, (Q - 2) / (2.0 * Q), ExponentKind.SOBOLEV
    else:
        expo, weight, ek = (Q + 2) / 2.0, (Q + 2) / (2.0 * Q), ExponentKind.HLS
    amp = c * 2.0 ** (-(Q - 1) * weight) * abs(A0) ** (-expo)
    return ExtremalField(ExtremalParams(amp, np.conj(eta_bar)), ek)


# -- distances ---------------------------------------------------------------

@dataclass
class DistanceResult:
    squared_distance: float
    argmin: ExtremalParams
    converged: bool
    restarts_used: int
    seed: int = 0
    evaluations: int = 0
    objective_trace: List[float] = field(default_factory=list)
    norm: str = "energy"

    def to_dict(self) -> dict:
        return {
            "squared_distance": self.squared_distance,
            "argmin": self.argmin.to_dict(),
            "converged": self.converged,
            "restarts_used": self.restarts_used,
            "seed": self.seed,
            "evaluations": self.evaluations,
            "trace_length": len(self.objective_trace),
            "best_per_restart": self.objective_trace,
            "norm": self.norm,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def squash(v: np.ndarray, n: int, cap: float = ETA_CAP) -> np.ndarray:
    """R^{2(n+1)} -> open ball: eta = min(tanh|v|, cap) v/|v|."""
    x = np.asarray(v[: n + 1]) + 1j * np.asarray(v[n + 1:])
    s = float(np.linalg.norm(x))
    if s == 0.0:
        return x
    return min(math.tanh(s), cap) * x / s


def unsquash(eta: np.ndarray, cap: float = ETA_CAP) -> np.ndarray:
    eta = np.asarray(eta, dtype=complex)
    rho = float(np.linalg.norm(eta))
    x = eta if rho == 0 else math.atanh(min(rho, cap)) * eta / rho
    return np.concatenate([x.real, x.imag])


@dataclass
class NodalField:
    """A real function known only through its values on a quadrature grid.

    Used for non-smooth fields such as positive and negative parts; the energy
    has to be supplied (for instance from a gradient density restricted to a set).
    """

    n: int
    grid: QuadratureGrid
    nodal_values: np.ndarray
    energy_value: float

    def values(self, grid: QuadratureGrid) -> np.ndarray:
        if grid is not self.grid:
            raise ValueError("a NodalField can only be evaluated on its own grid")
        return self.nodal_values

    def energy(self) -> float:
        return self.energy_value


def resolved_radius(grid: QuadratureGrid, b: Optional[float] = None, tol: float = 1e-8) -> float:
    """Largest |eta| (on a 0.01 ladder) for which the grid integrates |1 - conj(eta).xi|^{-b} to rel. tol.

    Checked along e_1 and along the diagonal direction.  The default b = (Q+2)/2
    is the peak of g^{q-1} that a nodal Sobolev pairing has to resolve.
    """
    n = grid.n
    b = (2 * n + 4) / 2.0 if b is None else float(b)
    dirs = [np.eye(n + 1, dtype=complex)[0], np.ones(n + 1, dtype=complex) / math.sqrt(n + 1)]
    best = 0.0
    for rho in np.arange(0.05, ETA_CAP + 1e-9, 0.01):
        exact = sphere_area(n) * float(hyp2f1(b / 2.0, b / 2.0, n + 1.0, rho * rho))
        ok = True
        for d in dirs:
            w = 1.0 - rho * (grid.nodes @ np.conj(d))
            approx = float(grid.integrate(np.abs(w) ** (-b)))
            if abs(approx - exact) > tol * exact:
                ok = False
                break
        if not ok:
            break
        best = float(rho)
    return max(best, 0.05)


class SobolevObjective:
    """eta -> min_c E[u - c g_eta] = E[u] - (Re <u, g_eta>_E)^2 / E[g_eta]."""

    def __init__(self, u):
        self.u = u
        self.n = getattr(u, "n", None)
        self.eta_cap = ETA_CAP
        if isinstance(u, SpectralField):
            self.zonal = ZonalProjector(u.basis, CRDimension(u.n).sobolev_exponent)
            self.Eu = u.energy()
            self._weighted = u.basis.eigenvalues * u.coeffs
        elif isinstance(u, ExtremalField):
            if u.kind != ExponentKind.SOBOLEV:
                raise ValueError("Sobolev distance needs a Sobolev-exponent field")
            self.Eu = u.energy()
        elif isinstance(u, NodalField):
            self.Eu = u.energy()
            self.eta_cap = resolved_radius(u.grid)
        else:
            raise TypeError("u must be a SpectralField, an ExtremalField or a NodalField")

    def pairing(self, eta: np.ndarray) -> float:
        if isinstance(self.u, SpectralField):
            g = self.zonal.coefficients(eta)
            return float(np.real(np.sum(self._weighted * np.conj(g))))
        if isinstance(self.u, NodalField):
            # <f, g>_E = <f, L g> and L g = lambda00 (1 - rho^2) g^{q-1}
            dim = CRDimension(self.n)
            gq1 = ExtremalField(ExtremalParams(1.0, eta)).values(self.u.grid) ** (dim.q - 1.0)
            rho2 = float(np.sum(np.abs(eta) ** 2))
            return dim.lambda00 * (1.0 - rho2) * float(self.u.grid.integrate(self.u.nodal_values * gq1))
        return self.u.c * sobolev_pairing_closed_form(self.u.eta, eta, self.n)

    def best_c(self, eta: np.ndarray) -> float:
        Eg = ExtremalField(ExtremalParams(1.0, eta)).energy()
        return self.pairing(eta) / Eg

    def __call__(self, eta: np.ndarray) -> float:
        Eg = ExtremalField(ExtremalParams(1.0, eta)).energy()
        P = self.pairing(eta)
        return self.Eu - P * P / Eg


def _multistart(
    objective, n: int, seed: int, restarts: int, maxfev: int, starts=None, xatol=1e-10, fatol=1e-15, cap: float = ETA_CAP
):
    rng = np.random.default_rng(seed)
    dim = 2 * (n + 1)
    initial = [np.zeros(dim)] + [rng.normal(scale=0.6, size=dim) for _ in range(restarts - 1)]
    if starts is not None:
        initial = [unsquash(e, cap) for e in starts] + initial
    best = None
    trace = []
    evals = 0
    for idx, x0 in enumerate(initial):
        res = minimize(
            lambda v: objective(squash(v, n, cap)),
            x0,
            method="Nelder-Mead",
            options={"maxfev": maxfev, "xatol": xatol, "fatol": fatol, "adaptive": True},
        )
        evals += res.nfev
        # polish once from the optimum to shake off simplex collapse
        res2 = minimize(
            lambda v: objective(squash(v, n, cap)),
            res.x,
            method="Nelder-Mead",
            options={"maxfev": maxfev, "xatol": xatol, "fatol": fatol, "adaptive": True},
        )
        evals += res2.nfev
        if res2.fun <= res.fun:
            res = res2
        trace.append(float(res.fun))
        if best is None or res.fun < best[0].fun:  # strict: ties keep the lowest restart index
            best = (res, idx)
    return best[0], trace, evals, len(initial)


def distance_to_sobolev_manifold(
    u,
    seed: int = 0,
    restarts: int = 8,
    maxfev: int = 2000,
    starts: Optional[list] = None,
) -> DistanceResult:
    """inf over c real and |eta| < 1 of E[u - c g_eta]."""
    obj = SobolevObjective(u)
    n = u.n
    res, trace, evals, used = _multistart(obj, n, seed, restarts, maxfev, starts, cap=obj.eta_cap)
    eta = squash(res.x, n, obj.eta_cap)
    c = obj.best_c(eta)
    val = float(obj(eta))
    on_cap = np.linalg.norm(eta) >= obj.eta_cap - 1e-12
    return DistanceResult(
        squared_distance=max(val, 0.0) if val > -1e-12 * max(obj.Eu, 1.0) else val,
        argmin=ExtremalParams(c, eta),
        converged=bool(res.success) and not on_cap,
        restarts_used=used,
        seed=seed,
        evaluations=evals,
        objective_trace=trace,
    )


def hls_objective_grid(n: int, degree: int = 24) -> QuadratureGrid:
    from .quadrature import quadrature_grid

    return quadrature_grid(n, degree)


def distance_to_hls_manifold(
    g,
    grid: Optional[QuadratureGrid] = None,
    seed: int = 0,
    restarts: int = 8,
    maxfev: int = 2000,
    starts: Optional[list] = None,
) -> DistanceResult:
    """inf over c real and |eta| < 1 of ||g - c h_eta||_{L^p}, p = 2Q/(Q+2), by quadrature.

    For each eta the amplitude c is found by a bounded scalar search
    (golden-section/Brent), nested inside the Nelder-Mead search over eta.
    The reported squared_distance is the square of that L^p distance.
    """
    n = g.n
    dim = CRDimension(n)
    p = 2.0 * dim.Q / (dim.Q + 2)
    grid = grid or hls_objective_grid(n)
    gv = np.real(g.values(grid))
    w = grid.weights
    gnorm = float(np.dot(w, np.abs(gv) ** p)) ** (1.0 / p)
    a = dim.hls_exponent

    def dist_for(eta):
        h = np.abs(1.0 - grid.nodes @ np.conj(eta)) ** (-a)
        hn = float(np.dot(w, h ** p)) ** (1.0 / p)
        # bracket c so that |c| ||h|| <= 2 ||g||
        cmax = 2.0 * gnorm / hn
        r = minimize_scalar(
            lambda c: float(np.dot(w, np.abs(gv - c * h) ** p)),
            bounds=(-cmax, cmax),
            method="bounded",
            options={"xatol": 1e-13 * max(cmax, 1.0)},
        )
        return r.fun, r.x

    def objective(eta):
        return dist_for(eta)[0]

    # |h|^p = |1 - conj(eta).xi|^{-Q}: only search where the grid resolves it
    cap = resolved_radius(grid, b=dim.Q)
    res, trace, evals, used = _multistart(objective, n, seed, restarts, maxfev, starts, fatol=1e-16, cap=cap)
    eta = squash(res.x, n, cap)
    val, c = dist_for(eta)
    d = max(val, 0.0) ** (1.0 / p)
    on_cap = np.linalg.norm(eta) >= cap - 1e-12
    return DistanceResult(
        squared_distance=d * d,
        argmin=ExtremalParams(c, eta),
        converged=bool(res.success) and not on_cap,
        restarts_used=used,
        seed=seed,
        evaluations=evals,
        objective_trace=[t ** (2.0 / p) if t > 0 else 0.0 for t in trace],
        norm=f"L^{p:g}",
    )

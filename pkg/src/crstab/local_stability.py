"""Local stability certificate near the constant function, and the sign-splitting reduction.

Everything in the certificate part uses the uniform probability measure d xi on
S^{2n+1}.  A perturbation r >= -1 of the constant 1 is cut at heights gamma < M:

    r1 = min(r, gamma),  r2 = min((r - gamma)_+, M - gamma),  r3 = (r - M)_+,

and the deficit of 1 + r is bounded from below by theta eps0 E[r] + I1 + I2 + I3.
The energies of the pieces are computed from the gradient density of r restricted
to {r < gamma}, {gamma < r < M} and {r > M}, so E_0 is additive over the pieces.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .extremals import ExtremalField, ExtremalParams, NodalField, SobolevObjective, distance_to_sobolev_manifold
from .functionals import perturbative_deficit
from .harmonics import Measure, SpectralField, eigenvalue
from .heisenberg import CRDimension
from .quadrature import QuadratureGrid, quadrature_grid, sphere_area

POINTWISE_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-10
DEFAULT_Q_GRID = (2.0, 2.4, 3.0)


class CertificateError(ValueError):
    """A precondition of the certificate is violated; the message names it."""


class DimensionError(CertificateError):
    pass


class DomainError(CertificateError):
    pass


class OrthogonalityError(CertificateError):
    pass


class SmallnessError(CertificateError):
    pass


class CutConstantError(RuntimeError):
    pass


# -- cutting -------------------------------------------------------------------

@dataclass
class CutDecomposition:
    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray

    def reassemble(self) -> np.ndarray:
        return self.r1 + self.r2 + self.r3


def cut(r, gamma: float, M: float) -> CutDecomposition:
    r = np.asarray(r, dtype=float)
    if not 0 < gamma < M:
        raise ValueError("need 0 < gamma < M")
    if np.any(r < -1.0):
        raise DomainError(f"r must be >= -1 (min {r.min():.3e})")
    r1 = np.minimum(r, gamma)
    r2 = np.minimum(np.maximum(r - gamma, 0.0), M - gamma)
    r3 = np.maximum(r - M, 0.0)
    return CutDecomposition(r1, r2, r3)


def _cut_sides(r, q: float, gamma: float, eps: float, M: float):
    """(LHS, RHS without the C term, coefficient of C) of the pointwise cut bound."""
    r = np.asarray(r, dtype=float)
    th = q - 2.0
    d = cut(r, gamma, M)
    lhs = (1.0 + r) ** q - 1.0 - q * r
    half = 0.5 * q * (q - 1.0)
    base = (
        (half + 2.0 * gamma * th) * d.r1 ** 2
        + half * d.r2 ** 2
        + 2.0 * d.r1 * d.r2
        + 2.0 * (d.r1 + d.r2) * d.r3
        + (1.0 + eps * th) * d.r3 ** q
    )
    return lhs, base, th * d.r2 ** 2


def pointwise_cut_bound(r, q: float, gamma: float, eps: float, M: float, C: float):
    """(1+r)^q - 1 - q r <= (q(q-1)/2 + 2 gamma theta) r1^2 + (q(q-1)/2 + C theta) r2^2
    + 2 r1 r2 + 2 (r1 + r2) r3 + (1 + eps theta) r3^q with theta = q - 2.

    Works elementwise on arrays; the comparison allows a 1e-12 relative slack.
    """
    lhs, base, ccoef = _cut_sides(r, q, gamma, eps, M)
    rhs = base + C * ccoef
    ok = lhs <= rhs + POINTWISE_TOL * np.maximum(1.0, np.abs(rhs))
    return bool(ok) if np.ndim(ok) == 0 else ok


def estimate_cut_constant(
    gamma: float,
    eps: float,
    M: float,
    q_grid: Sequence[float] = DEFAULT_Q_GRID,
    points: int = 100_000,
    margin: float = 0.1,
    cap: float = 1e12,
) -> float:
    """Smallest C making the pointwise bound hold on r in [-1, 10 M] for every q, times (1 + margin)."""
    if not 0 < gamma < M / 2:
        raise ValueError("need 0 < gamma < M/2")
    r = np.linspace(-1.0, 10.0 * M, points)
    need = 0.0
    for q in q_grid:
        if not 2.0 <= q <= 3.0:
            raise ValueError("q must lie in [2, 3]")
        lhs, base, ccoef = _cut_sides(r, q, gamma, eps, M)
        excess = lhs - base - POINTWISE_TOL * np.maximum(1.0, np.abs(base))
        bad = excess > 0
        if not np.any(bad):
            continue
        if np.any(bad & (ccoef <= 0)):
            worst = r[bad & (ccoef <= 0)][0]
            raise CutConstantError(f"no finite C: the bound fails at r = {worst:.6g}, q = {q} where r2 = 0")
        need = max(need, float(np.max(excess[bad] / ccoef[bad])))
    if need > cap:
        raise CutConstantError(f"required C = {need:.3e} exceeds the cap {cap:.1e}")
    return need * (1.0 + margin)


# -- constants -----------------------------------------------------------------

@dataclass
class CutParams:
    n: int
    q: float
    theta: float
    eps0: float
    eps1: float
    eps2: float
    gamma: float
    M: float
    eps: float
    sigma0: float
    C_cut: float
    L_degree: int
    delta1: float
    delta2: float
    delta_tilde: float
    log10_delta_tilde: float
    log10_sufficient_condition: float
    q_grid: tuple = DEFAULT_Q_GRID
    notes: list = field(default_factory=list)

    @property
    def sufficient_condition_holds(self) -> bool:
        """3^L gamma^{-q/2} delta_tilde^{q/4} <= 1/2."""
        return self.log10_sufficient_condition <= math.log10(0.5)

    @property
    def representable(self) -> bool:
        """False when delta_tilde underflows to zero in double precision."""
        return self.delta_tilde > 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["q_grid"] = list(self.q_grid)
        d["sufficient_condition_holds"] = self.sufficient_condition_holds
        d["representable"] = self.representable
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def constants_chooser(
    eps0: float = 1.0 / 6.0,
    n: int = 2,
    M: Optional[float] = None,
    q_grid: Optional[Sequence[float]] = None,
) -> CutParams:
    """Derive every certificate constant from eps0.

    eps1 = (1 - 3 eps0)/2, eps2 = (1 - 3 eps0)/4, gamma = eps1/2 = eps2, cut lemma
    slack eps = eps2, sigma0 = (2/q) eps2, L = ceil(4(1 + eps0 + sigma0 + C)/(1 - eps0)),
    delta1 = 4 eps1 eps2 gamma^2 / (q (1 + (2 + 4 sqrt 3)(eps0 + eps1))^2),
    delta2 = gamma^2 / (2 * 3^{2L}), delta_tilde = min(delta1, delta2).
    M defaults to 4 gamma.
    """
    if not 0 < eps0 < 1.0 / 3.0:
        raise ValueError("eps0 must lie in (0, 1/3)")
    dim = CRDimension(n)
    q = dim.q
    eps1 = 0.5 * (1.0 - 3.0 * eps0)
    eps2 = 0.25 * (1.0 - 3.0 * eps0)
    gamma = 0.5 * eps1
    M = 4.0 * gamma if M is None else float(M)
    eps = eps2
    sigma0 = (2.0 / q) * eps2
    if q_grid is None:
        q_grid = tuple(sorted(set(DEFAULT_Q_GRID) | ({q} if 2.0 <= q <= 3.0 else set())))
    C = estimate_cut_constant(gamma, eps, M, q_grid)
    L = int(math.ceil(4.0 * (1.0 + eps0 + sigma0 + C) / (1.0 - eps0)))
    delta1 = 4.0 * eps1 * eps2 * gamma ** 2 / (q * (1.0 + (2.0 + 4.0 * math.sqrt(3.0)) * (eps0 + eps1)) ** 2)
    # delta2 underflows double precision once L exceeds a few hundred, so keep logarithms
    log10_delta2 = math.log10(0.5 * gamma ** 2) - 2 * L * math.log10(3.0)
    log10_dt = min(math.log10(delta1), log10_delta2)
    delta2 = 10.0 ** log10_delta2
    dt = 10.0 ** log10_dt
    log10_suff = L * math.log10(3.0) - (q / 2.0) * math.log10(gamma) + (q / 4.0) * log10_dt
    notes = [
        "gamma = eps1/2 = eps2 from the two defining formulas; the relation eps2 = 2 eps1 does not hold (eps2 = eps1/2)",
    ]
    return CutParams(
        n=n, q=q, theta=dim.theta, eps0=eps0, eps1=eps1, eps2=eps2, gamma=gamma, M=M, eps=eps,
        sigma0=sigma0, C_cut=C, L_degree=L, delta1=delta1, delta2=delta2, delta_tilde=dt,
        log10_delta_tilde=log10_dt, log10_sufficient_condition=log10_suff, q_grid=tuple(q_grid), notes=notes,
    )


# -- certificate ---------------------------------------------------------------

@dataclass
class TermReport:
    I1: float
    I2: float
    I3: float
    deficit: float
    energy: float
    headline_margin: float
    splitting_slack: float
    cross_term_correction: float
    mean_r1: float
    zeta_projections: list
    inner_products: dict
    orthogonality_residual: float
    lq_norm_sq: float
    smallness_satisfied: bool
    pointwise_violations: int
    projection_checks: list
    params: dict

    @property
    def certificate_holds(self) -> bool:
        return self.smallness_satisfied and min(self.I1, self.I2, self.I3) >= -1e-9

    @property
    def terms_nonnegative(self) -> bool:
        return min(self.I1, self.I2, self.I3) >= -1e-9

    @property
    def headline_holds(self) -> bool:
        return self.headline_margin >= -1e-8

    def to_dict(self) -> dict:
        d = asdict(self)
        d["certificate_holds"] = self.certificate_holds
        d["headline_holds"] = self.headline_holds
        d["terms_nonnegative"] = self.terms_nonnegative
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float)


def low_mode_residual(r: SpectralField) -> float:
    """Largest |coefficient| of r on H_{0,0}, H_{1,0} and H_{0,1} (probability normalization)."""
    scale = 1.0 / math.sqrt(sphere_area(r.n))
    out = 0.0
    for jk in [(0, 0), (1, 0), (0, 1)]:
        if jk in r.basis.offsets:
            out = max(out, float(np.max(np.abs(r.coeffs[r.basis.block_slice(*jk)]))) * scale)
    return out


def certificate_grid(r: SpectralField) -> QuadratureGrid:
    """Exact for |T r|^2 and r^2 when r stays below gamma; indicator integrals are approximate anyway."""
    return quadrature_grid(r.n, 2 * r.basis.D + 2)


def verify_certificate(
    r: SpectralField,
    params: CutParams,
    grid: Optional[QuadratureGrid] = None,
    enforce_smallness: bool = True,
) -> TermReport:
    """Evaluate I1, I2, I3 for 1 + r and the bound deficit(1 + r) >= theta eps0 E[r] (probability measure).

    With enforce_smallness=False an oversized r is evaluated anyway and the
    report records smallness_satisfied = False; it is then no longer a certificate.
    """
    n = r.n
    if n < 2:
        raise DimensionError("the certificate needs n >= 2 so that q lies in (2, 3]")
    if params.n != n:
        raise DimensionError(f"parameters were chosen for n = {params.n}, field has n = {n}")
    if r.realness_defect() > 1e-12:
        raise DomainError("r must be real-valued")
    grid = grid or certificate_grid(r)
    area = sphere_area(n)
    rv = np.real(r.values(grid))
    if np.any(rv < -1.0):
        raise DomainError(f"r >= -1 fails at a node (min {rv.min():.3e})")
    resid = low_mode_residual(r)
    if resid >= ORTHOGONALITY_TOL:
        raise OrthogonalityError(
            f"orthogonality to constants and to zeta_j, conj(zeta_j) fails: residual {resid:.3e}"
        )
    dim = CRDimension(n)
    q, th, lam = dim.q, dim.theta, dim.lambda00
    lq_sq = (float(grid.integrate(np.abs(rv) ** q)) / area) ** (2.0 / q)
    small = lq_sq <= params.delta_tilde
    if not small and enforce_smallness:
        raise SmallnessError(f"||r||_q^2 = {lq_sq:.3e} exceeds delta_tilde = {params.delta_tilde:.3e}")

    def mean(f):
        return float(grid.integrate(f)) / area

    d = cut(rv, params.gamma, params.M)
    pieces = (d.r1, d.r2, d.r3)
    dens = 0.5 * np.sum(np.abs(r.derivative_values(grid)) ** 2, axis=0)
    masks = (rv < params.gamma, (rv > params.gamma) & (rv < params.M), rv > params.M)
    E0 = [mean(dens * m) for m in masks]
    ip = {f"({i + 1},{j + 1})": mean(pieces[i] * pieces[j]) for i in range(3) for j in range(i, 3)}
    rr = [ip["(1,1)"], ip["(2,2)"], ip["(3,3)"]]
    E = [E0[i] + lam * rr[i] for i in range(3)]
    cross = ip["(1,2)"] + ip["(1,3)"] + ip["(2,3)"]
    # literal identity (r, r) = sum (r_i, r_i) + 2 sum_{i<j} (r_i, r_j)
    r_sq = mean(rv * rv)
    if abs(r_sq - (sum(rr) + 2.0 * cross)) > 1e-12 * max(r_sq, 1e-300) + 1e-300:
        raise AssertionError("piece inner products do not reassemble (r, r)")

    e0 = params.eps0
    one = 1.0 - th * e0
    I1 = one * E[0] - lam * (q - 1.0 + params.eps1 * th) * rr[0] + lam * params.sigma0 * th * (rr[1] + rr[2])
    I2 = one * E[1] - lam * (q - 1.0 + (params.sigma0 + params.C_cut) * th) * rr[1]
    I3 = (
        one * E[2]
        - (2.0 / q) * lam * (1.0 + params.eps2 * th) * mean(d.r3 ** q)
        - lam * params.sigma0 * th * rr[2]
    )

    # mean of r1 and its projections on zeta_j, conj(zeta_j)
    nodes = grid.nodes
    zproj = []
    for j in range(n + 1):
        zproj.append(complex(grid.integrate(d.r1 * np.conj(nodes[:, j]))) / area)
        zproj.append(complex(grid.integrate(d.r1 * nodes[:, j])) / area)

    Er = r.energy() / area
    deficit = perturbative_deficit(r)
    headline = deficit - th * e0 * Er
    cross_corr = 2.0 * th * e0 * lam * cross
    slack = deficit - th * e0 * Er - (I1 + I2 + I3)

    viol = int(np.sum(~pointwise_cut_bound(rv, q, params.gamma, params.eps, params.M, params.C_cut)))

    proj_checks = []
    if np.any(d.r2 > 0):
        coeffs = r.basis.analysis(grid, grid.weights * d.r2)
        nr2 = math.sqrt(mean(d.r2 ** 2))
        bound_base = params.gamma ** (-q / 4.0) * params.delta_tilde ** (q / 8.0) * nr2
        for (j, k) in r.basis.order:
            if j + k >= params.L_degree:
                continue
            pn = float(np.linalg.norm(coeffs[r.basis.block_slice(j, k)])) / math.sqrt(area)
            proj_checks.append({"j": j, "k": k, "norm": pn, "bound": 3.0 ** ((j + k) / 2.0) * bound_base})

    return TermReport(
        I1=float(I1), I2=float(I2), I3=float(I3), deficit=float(deficit), energy=float(Er),
        headline_margin=float(headline), splitting_slack=float(slack), cross_term_correction=float(cross_corr),
        mean_r1=mean(d.r1), zeta_projections=[[z.real, z.imag] for z in zproj], inner_products=ip,
        orthogonality_residual=resid, lq_norm_sq=lq_sq, smallness_satisfied=bool(small), pointwise_violations=viol,
        projection_checks=proj_checks, params=params.to_dict(),
    )


def admissible_perturbation(
    basis, rng: np.random.Generator, target_lq_sq: float, grid: Optional[QuadratureGrid] = None
) -> SpectralField:
    """Random real field without H_{0,0}, H_{1,0}, H_{0,1} components, scaled to ||r||_q^2 = target (probability)."""
    c = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    r = SpectralField(basis, c).real_part().without_low_modes()
    grid = grid or certificate_grid(r)
    q = CRDimension(basis.n).q
    lq_sq = (float(grid.integrate(np.abs(np.real(r.values(grid))) ** q)) / sphere_area(basis.n)) ** (2.0 / q)
    return r * math.sqrt(target_lq_sq / lq_sq)


# -- spectral ratio --------------------------------------------------------------

def spectral_ratio(j: int, k: int, n: int) -> float:
    """1 - (q - 1) lambda_{0,0} / lambda_{j,k}: the second-order deficit/distance ratio along H_{j,k}."""
    if j + k < 2:
        raise ValueError("bidegrees with j + k < 2 are tangent to the extremal manifold")
    dim = CRDimension(n)
    return 1.0 - (dim.q - 1.0) * dim.lambda00 / eigenvalue(j, k, n)


@dataclass
class RatioEstimate:
    j: int
    k: int
    n: int
    eps: list
    ratios: list
    extrapolated: float
    predicted: float
    denominator: str

    @property
    def relative_error(self) -> float:
        return abs(self.extrapolated - self.predicted) / self.predicted

    def to_dict(self) -> dict:
        d = asdict(self)
        d["relative_error"] = self.relative_error
        return d


def finite_difference_ratio(
    basis, j: int, k: int, eps: Sequence[float] = (1e-2, 5e-3, 2.5e-3), use_distance: bool = True, seed: int = 0
) -> RatioEstimate:
    """deficit(1 + eps Y) / d^2 along a real Y in H_{j,k}, Richardson-extrapolated to eps = 0.

    With use_distance the denominator is the optimised squared distance to the
    extremal manifold; otherwise it is its tangent-space value eps^2 E[Y].  The
    quotients have an eps^2 error term (odd moments of Y vanish for j != k and
    the even expansion dominates otherwise), so successive halvings are combined
    with weights (4 R(eps/2) - R(eps)) / 3.
    """
    from .harmonics import real_harmonic

    Y = real_harmonic(basis, j, k)
    area = sphere_area(basis.n)
    ratios = []
    for e in eps:
        r = Y * e
        deficit = area * perturbative_deficit(r)
        if use_distance:
            d2 = distance_to_sobolev_manifold(SpectralField.constant(basis) + r, seed=seed, restarts=4).squared_distance
        else:
            d2 = r.energy()
        ratios.append(deficit / d2)
    level = list(ratios)
    while len(level) > 1:
        level = [(4.0 * level[i + 1] - level[i]) / 3.0 for i in range(len(level) - 1)]
    return RatioEstimate(
        j, k, basis.n, list(eps), ratios, level[0], spectral_ratio(j, k, basis.n),
        "distance" if use_distance else "tangent",
    )


# -- positive and negative parts ------------------------------------------------------

def split_floor(Q: int) -> float:
    """1 - 2^{-2/Q}."""
    return 1.0 - 2.0 ** (-2.0 / Q)


@dataclass
class SplitReport:
    n: int
    m: float
    swapped: bool
    K: float
    energy: float
    energy_plus: float
    energy_minus: float
    energy_additivity_residual: float
    lq_additivity_residual: float
    deficit: float
    deficit_plus: float
    deficit_minus: float
    concavity_gap: float
    negative_coefficient: float
    floor: float
    dist_plus: float
    ratio_plus: float
    dist_u_gplus: float
    chain: list
    slacks: list
    tolerance: float

    @property
    def holds(self) -> bool:
        return all(s >= -self.tolerance for s in self.slacks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def pos_neg_split_bound(
    u: SpectralField,
    grid: Optional[QuadratureGrid] = None,
    seed: int = 0,
    restarts: int = 3,
    maxfev: int = 800,
    rtol: float = 1e-8,
) -> SplitReport:
    """Numerically assemble the chain bounding the deficit of a sign-changing u (surface measure).

    With ||u||_q = 1, m = ||u_-||_q^q <= 1/2 (swap u -> -u otherwise),
    K = lambda00 |S|^{2/Q}, c = 2 - 2^{1 - 2/Q} and g_+ the best extremal for u_+:

        Def(u) >= Def(u_+) + Def(u_-) + K((1-m)^{2/q} + m^{2/q} - 1)
               >= Def(u_+) + c E[u_-]
               >= min{S(u_+), c} (E[u_+ - g_+] + E[u_-])
               >= (1/2) min{S(u_+), c} E[u_+ - g_+],

    and also min{S(u_+), c}(E[u_+ - g_+] + E[u_-]) >= (1/2) min{S(u_+), c} E[u - g_+].
    """
    n = u.n
    if u.realness_defect() > 1e-12:
        raise ValueError("u must be real-valued")
    dim = CRDimension(n)
    q, Q, lam = dim.q, dim.Q, dim.lambda00
    grid = grid or quadrature_grid(n, max(int(math.ceil(q)) * u.basis.D, 40 if n == 1 else 16))
    vals = np.real(u.values(grid))
    norm = float(grid.integrate(np.abs(vals) ** q)) ** (1.0 / q)
    if norm <= 0:
        raise ValueError("zero field")
    u = u * (1.0 / norm)
    vals = vals / norm
    m = float(grid.integrate(np.maximum(-vals, 0.0) ** q))
    swapped = m > 0.5
    if swapped:
        u = u * -1.0
        vals = -vals
        m = float(grid.integrate(np.maximum(-vals, 0.0) ** q))
    K = lam * sphere_area(n) ** (2.0 / Q)
    plus = np.maximum(vals, 0.0)
    minus = np.maximum(-vals, 0.0)
    dens = 0.5 * np.sum(np.abs(u.derivative_values(grid)) ** 2, axis=0)
    E_all = float(grid.integrate(dens + lam * vals ** 2))
    E_plus = float(grid.integrate(dens * (vals > 0) + lam * plus ** 2))
    E_minus = float(grid.integrate(dens * (vals < 0) + lam * minus ** 2))
    Iq_plus = float(grid.integrate(plus ** q))
    Iq_minus = m
    Iq_all = float(grid.integrate(np.abs(vals) ** q))

    def_u = E_all - K * Iq_all ** (2.0 / q)
    def_plus = E_plus - K * Iq_plus ** (2.0 / q)
    def_minus = E_minus - K * Iq_minus ** (2.0 / q)
    gap = (1.0 - m) ** (2.0 / q) + m ** (2.0 / q) - 1.0
    cneg = 2.0 - 2.0 ** (1.0 - 2.0 / Q)

    if m == 0.0:
        res = distance_to_sobolev_manifold(u, seed=seed, restarts=restarts, maxfev=maxfev)
    else:
        res = distance_to_sobolev_manifold(
            NodalField(n, grid, plus, E_plus), seed=seed, restarts=restarts, maxfev=maxfev
        )
    d_plus = res.squared_distance
    ratio_plus = def_plus / d_plus if d_plus > 0 else math.inf
    mu = min(ratio_plus, cneg)
    # E[u - g_+] from the spectral energy of u and the extremal pairing
    gp = res.argmin
    obj_u = SobolevObjective(u)
    Eg = ExtremalField(ExtremalParams(1.0, gp.eta)).energy()
    d_u = u.energy() - 2.0 * gp.c * obj_u.pairing(gp.eta_array) + gp.c ** 2 * Eg

    chain = [
        def_u,
        def_plus + def_minus + K * gap,
        def_plus + cneg * E_minus,
        mu * (d_plus + E_minus),
        0.5 * mu * d_plus,
        0.5 * mu * d_u,
    ]
    slacks = [chain[0] - chain[1], chain[1] - chain[2], chain[2] - chain[3], chain[3] - chain[4], chain[3] - chain[5]]
    tol = rtol * max(E_all, 1.0)
    return SplitReport(
        n=n, m=m, swapped=swapped, K=K, energy=E_all, energy_plus=E_plus, energy_minus=E_minus,
        energy_additivity_residual=E_all - E_plus - E_minus, lq_additivity_residual=Iq_all - Iq_plus - Iq_minus,
        deficit=def_u, deficit_plus=def_plus, deficit_minus=def_minus, concavity_gap=gap,
        negative_coefficient=cneg, floor=split_floor(Q), dist_plus=d_plus, ratio_plus=ratio_plus,
        dist_u_gplus=d_u, chain=chain, slacks=slacks, tolerance=tol,
    )

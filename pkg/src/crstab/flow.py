"""Spectral Galerkin discretisation of the normalised CR Yamabe flow on S^{2n+1}.

u_t = (n/2)(r - R) u with R = c_n L u / u^{1+2/n}, c_n = n/(4(n+1)).  The total
curvature is S = c_n E[u] and the volume is V = int u^{2+2/n}.

In the continuous flow r is the volume-weighted mean of R, which keeps V fixed.
After Galerkin projection that choice leaves a small volume drift, so the
default multiplier is instead chosen so that d/dt of the quadrature volume of
the projected dynamics vanishes identically ("galerkin"); the plain mean is
available as multiplier="mean".
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .extremals import distance_to_sobolev_manifold
from .functionals import sobolev_deficit
from .harmonics import HarmonicBasis, Measure, SpectralField, project
from .heisenberg import CRDimension
from .quadrature import QuadratureGrid, quadrature_grid


class PositivityError(ValueError):
    pass


class StiffFailure(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class RatioNotReached(RuntimeError):
    def __init__(self, message: str, final_ratio: float):
        super().__init__(message)
        self.final_ratio = final_ratio


class ChainPreconditionError(ValueError):
    pass


@dataclass
class FlowState:
    u: SpectralField
    time: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.u.n,
                "D": self.u.basis.D,
                "time": self.time,
                "re": self.u.coeffs.real.tolist(),
                "im": self.u.coeffs.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str, basis: HarmonicBasis) -> "FlowState":
        d = json.loads(text)
        if d["n"] != basis.n or d["D"] != basis.D:
            raise ValueError("checkpoint does not match the supplied basis")
        return cls(SpectralField(basis, np.array(d["re"]) + 1j * np.array(d["im"])), d["time"])


@dataclass
class FlowSample:
    t: float
    S: float
    V: float
    r: float
    var: float
    dist_ratio: float = float("nan")


@dataclass
class FlowTrace:
    samples: List[FlowSample] = field(default_factory=list)
    rejected_steps: int = 0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "S", "V", "r", "var", "dist_ratio"])
        for s in self.samples:
            w.writerow([repr(s.t), repr(s.S), repr(s.V), repr(s.r), repr(s.var), repr(s.dist_ratio)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"rejected_steps": self.rejected_steps, "samples": [s.__dict__ for s in self.samples]}, sort_keys=True
        )

    def max_energy_increase(self) -> float:
        S = self.column("S")
        return float(np.max(np.diff(S), initial=0.0))

    def max_volume_drift(self) -> float:
        V = self.column("V")
        return float(np.max(np.abs(V - V[0]) / V[0]))

    def dissipation_mismatch(self, threshold: float = 1e-8) -> float:
        """Worst relative gap between centred dS/dt and -n int (r-R)^2 dV at interior samples."""
        t, S, var = self.column("t"), self.column("S"), self.column("var")
        worst = 0.0
        for m in range(1, len(t) - 1):
            h1, h2 = t[m] - t[m - 1], t[m + 1] - t[m]
            if h1 <= 0 or h2 <= 0 or abs(h1 - h2) > 1e-12 * max(h1, h2):
                continue
            dS = (S[m + 1] - S[m - 1]) / (h1 + h2)
            if abs(dS) > threshold:
                n_pred = -self.n * var[m]
                worst = max(worst, abs(dS - n_pred) / abs(dS))
        return worst

    n: int = 1


class YamabeFlow:
    """Projected CR Yamabe dynamics on a fixed basis and nodal grid."""

    def __init__(
        self,
        basis: HarmonicBasis,
        grid: Optional[QuadratureGrid] = None,
        energy_tol: float = 1e-8,
        multiplier: str = "galerkin",
        curvature_scale: str = "operator",
    ):
        self.basis = basis
        self.n = basis.n
        self.dim = CRDimension(self.n)
        self.grid = grid or quadrature_grid(self.n, 3 * basis.D)
        if multiplier not in ("galerkin", "mean"):
            raise ValueError("multiplier must be 'galerkin' or 'mean'")
        if curvature_scale not in ("operator", "webster"):
            raise ValueError("curvature_scale must be 'operator' or 'webster'")
        self.multiplier = multiplier
        self.curvature_scale = curvature_scale
        # operator: R = n/(4(n+1)) L u / u^{1+2/n}; webster: rescaled so that R[1] = n(n+1)
        self.cn = self.n / (4.0 * (self.n + 1))
        if curvature_scale == "webster":
            self.cn = self.n * (self.n + 1) / self.dim.lambda00
        self.M = basis.matrix(self.grid)
        self.MH = np.conj(self.M).T * self.grid.weights[None, :]
        self.lam = basis.eigenvalues
        self.energy_tol = energy_tol
        self.lambda_max = float(self.lam.max())
        # the stable explicit step scales inversely with the curvature prefactor
        self.dt_max = 0.5 / self.lambda_max * (self.n / (4.0 * (self.n + 1))) / self.cn

    # -- nodal quantities ----------------------------------------------------
    def nodal(self, coeffs: np.ndarray) -> np.ndarray:
        return (self.M @ coeffs).real

    def webster_scalar(self, coeffs: np.ndarray) -> np.ndarray:
        u = self.nodal(coeffs)
        if np.min(u) <= 0:
            raise PositivityError(f"non-positive node value {np.min(u):.3e}")
        Lu = (self.M @ (self.lam * coeffs)).real
        return self.cn * Lu / u ** (1.0 + 2.0 / self.n)

    def average_curvature(self, coeffs: np.ndarray) -> float:
        u = self.nodal(coeffs)
        R = self.webster_scalar(coeffs)
        uq = u ** self.dim.q
        return float(self.grid.integrate(R * uq) / self.grid.integrate(uq))

    def rhs(self, coeffs: np.ndarray) -> np.ndarray:
        u = self.nodal(coeffs)
        if np.min(u) <= 0:
            raise PositivityError(f"non-positive node value {np.min(u):.3e}")
        Lu = (self.M @ (self.lam * coeffs)).real
        R = self.cn * Lu / u ** (1.0 + 2.0 / self.n)
        uq = u ** self.dim.q
        if self.multiplier == "mean":
            r = self.grid.integrate(R * uq) / self.grid.integrate(uq)
            return self.MH @ (0.5 * self.n * (r - R) * u)
        # Choose r so that d/dt int u^q vanishes for the projected velocity:
        # int u^{q-1} P[(r - R) u] = 0, with u itself band-limited (P u = u).
        PRu = self.M @ (self.MH @ (R * u))
        um1 = uq / u
        r = self.grid.integrate(um1 * PRu.real) / self.grid.integrate(uq)
        return 0.5 * self.n * (r * coeffs - self.MH @ (R * u))

    def diagnostics(self, coeffs: np.ndarray) -> dict:
        u = self.nodal(coeffs)
        R = self.webster_scalar(coeffs)
        uq = u ** self.dim.q
        V = float(self.grid.integrate(uq))
        r = float(self.grid.integrate(R * uq)) / V
        var = float(self.grid.integrate((r - R) ** 2 * uq))
        S = self.cn * float(np.sum(self.lam * np.abs(coeffs) ** 2))
        return {"S": S, "V": V, "r": r, "var": var, "min_u": float(u.min())}

    # -- time stepping ---------------------------------------------------
    def _rk4(self, c: np.ndarray, dt: float) -> np.ndarray:
        k1 = self.rhs(c)
        k2 = self.rhs(c + 0.5 * dt * k1)
        k3 = self.rhs(c + 0.5 * dt * k2)
        k4 = self.rhs(c + dt * k3)
        return c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    def step(self, state: FlowState, dt: float, S_ref: Optional[float] = None):
        """One RK4 step with rejection/halving; returns (new_state, dt_used, rejections)."""
        if not dt > 0:
            raise ValueError("dt must be positive")
        c0 = state.u.coeffs
        S0 = self.cn * float(np.sum(self.lam * np.abs(c0) ** 2))
        S_ref = S0 if S_ref is None else S_ref
        trial = min(dt, self.dt_max)
        history = []
        for halving in range(21):
            try:
                c1 = self._rk4(c0, trial)
                u1 = self.nodal(c1)
                S1 = self.cn * float(np.sum(self.lam * np.abs(c1) ** 2))
                ok = u1.min() > 0 and S1 <= S0 + self.energy_tol * S_ref
                history.append({"dt": trial, "min_u": float(u1.min()), "dS": S1 - S0})
            except PositivityError as exc:
                ok = False
                history.append({"dt": trial, "error": str(exc)})
            if ok:
                return FlowState(SpectralField(self.basis, c1), state.time + trial), trial, halving
            trial *= 0.5
        raise StiffFailure("time step underflow after 20 halvings", {"history": history, "time": state.time})

    def advance(self, state: FlowState, duration: float, S_ref: Optional[float] = None) -> FlowState:
        """Integrate for exactly `duration` (last step shortened)."""
        t_end = state.time + duration
        while t_end - state.time > 1e-14 * max(1.0, t_end):
            dt = min(self.dt_max, t_end - state.time)
            state, used, _ = self.step(state, dt, S_ref)
        return state

    def sample(self, state: FlowState, dist_ratio: float = float("nan")) -> FlowSample:
        d = self.diagnostics(state.u.coeffs)
        return FlowSample(state.time, d["S"], d["V"], d["r"], d["var"], dist_ratio)


def relative_distance(u: SpectralField, warm: Optional[list] = None, restarts: int = 8, seed: int = 0):
    res = distance_to_sobolev_manifold(u, seed=seed, restarts=restarts, starts=warm)
    return res.squared_distance / u.energy(), res


def run(
    u0: SpectralField,
    T: Optional[float] = None,
    ratio: Optional[float] = None,
    flow: Optional[YamabeFlow] = None,
    distance_every: float = 1.0,
    max_time: float = 200.0,
    rtol_time: float = 1e-4,
    seed: int = 0,
):
    """Run until time T, or until the relative distance to the extremal manifold first drops to `ratio`.

    Returns (trace, final_state, crossing).  In ratio mode the final state is the
    left end of the bisection bracket (ratio still >= the target), crossing holds
    both bracket states and the bracket width is at most rtol_time times its right
    end; in time mode crossing is None.
    """
    if (T is None) == (ratio is None):
        raise ValueError("give exactly one of T or ratio")
    flow = flow or YamabeFlow(u0.basis)
    state = FlowState(u0.copy(), 0.0)
    trace = FlowTrace(n=u0.n)
    S_ref = flow.diagnostics(state.u.coeffs)["S"]
    warm = None

    def dist(st):
        nonlocal warm
        rr, res = relative_distance(st.u, warm=warm, restarts=3 if warm else 8, seed=seed)
        warm = [res.argmin.eta_array]
        return rr

    rr0 = dist(state)
    trace.samples.append(flow.sample(state, rr0))
    if ratio is not None and rr0 <= ratio:
        raise RatioNotReached(f"initial relative distance {rr0:.6g} is already <= {ratio}", rr0)
    next_dist = distance_every
    t_stop = T if T is not None else max_time
    last_sampled = state
    while state.time < t_stop - 1e-12:
        dt = min(flow.dt_max, t_stop - state.time)
        state, used, rej = flow.step(state, dt, S_ref)
        trace.rejected_steps += rej
        due = state.time >= next_dist - 1e-12 or state.time >= t_stop - 1e-12
        rr = float("nan")
        if due:
            rr = dist(state)
            next_dist = state.time + distance_every
        trace.samples.append(flow.sample(state, rr))
        if ratio is not None and due and rr <= ratio:
            # the last sampled state still has ratio > target: bisect in time from there
            lo, hi = last_sampled.time, state.time
            left_state, right_state = last_sampled, state
            while hi - lo > rtol_time * hi:
                mid = 0.5 * (lo + hi)
                mid_state = flow.advance(left_state, mid - left_state.time, S_ref)
                if dist(mid_state) > ratio:
                    lo, left_state = mid, mid_state
                else:
                    hi, right_state = mid, mid_state
            return trace, left_state, Crossing(lo, hi, left_state, right_state)
        if due:
            last_sampled = state
    if ratio is not None:
        raise RatioNotReached(f"ratio {ratio} not reached by t={state.time}", trace.samples[-1].dist_ratio)
    return trace, state, None


@dataclass
class Crossing:
    """Bisection bracket [lo, hi] around the first time the relative distance reaches the target."""

    lo: float
    hi: float
    left: FlowState
    right: FlowState

    @property
    def bracket(self) -> tuple:
        return (self.lo, self.hi)

    @property
    def relative_width(self) -> float:
        return (self.hi - self.lo) / self.hi


# -- the local-to-global chain --------------------------------------------

def positive_clipped(u: SpectralField, flow: "YamabeFlow", floor: float = 0.02, max_tries: int = 12) -> SpectralField:
    """Band-limited projection of max(u, floor), raising the floor until the result is positive at the flow nodes."""
    vals = np.real(u.values(flow.grid))
    for _ in range(max_tries):
        v = project(np.maximum(vals, floor), u.basis, flow.grid).real_part()
        if flow.nodal(v.coeffs).min() > 0:
            return v
        floor *= 2.0
    raise PositivityError("could not produce a positive clipped field")


@dataclass
class ChainReport:
    delta: float
    t0: float
    bracket: tuple
    bracket_relative_width: float
    deficit_over_distance_u0: float
    deficit_over_energy_u0: float
    deficit_over_energy_t0: float
    delta_deficit_over_distance_t0: float
    delta_min_ratio_at_crossing: float
    ratio_u0: float
    ratio_t0: float
    ratio_right: float
    slacks: list
    certificate_link: str = "not applicable"

    @property
    def holds(self) -> bool:
        return all(s >= -1e-8 for s in self.slacks)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["holds"] = self.holds
        d["bracket"] = list(self.bracket)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def local_to_global_chain(
    u0: SpectralField,
    delta: float,
    flow: Optional[YamabeFlow] = None,
    seed: int = 0,
    distance_every: float = 1.0,
    rtol_time: float = 1e-4,
) -> ChainReport:
    """Flow u0 to the delta-crossing and evaluate the terms of the chain.

    A = Def/d^2 at u0, B = Def/E at u0, C = Def/E at t0, D = delta Def/d^2 at t0,
    and N = delta times the smaller deficit/distance quotient of the two bracket
    states.  The right bracket state has relative distance <= delta, so N is an
    upper bound for delta times the infimum over the whole delta-neighbourhood;
    it is the value the flow can certify.  Slacks are A - B, B - C, C - D, D - N.
    """
    flow = flow or YamabeFlow(u0.basis)
    vals = flow.nodal(u0.coeffs)
    if vals.min() < 0:
        raise ChainPreconditionError("u0 must be nonnegative at the nodes")
    grid = flow.grid

    def parts(u):
        rep = sobolev_deficit(u, grid=grid, measure=Measure.SURFACE)
        rr, res = relative_distance(u, seed=seed)
        return rep.deficit, rep.energy, res.squared_distance, rr

    Def0, E0, d0, rr0 = parts(u0)
    if rr0 <= delta:
        raise ChainPreconditionError(f"initial relative distance {rr0:.6g} does not exceed delta = {delta}")
    trace, state, crossing = run(
        u0, ratio=delta, flow=flow, seed=seed, distance_every=distance_every, rtol_time=rtol_time
    )
    Def1, E1, d1, rr1 = parts(state.u)
    Def2, E2, d2, rr2 = parts(crossing.right.u)
    A = Def0 / d0
    B = Def0 / E0
    C = Def1 / E1
    D = delta * Def1 / d1
    N = delta * min(Def1 / d1, Def2 / d2)
    slacks = [A - B, B - C, C - D, D - N]
    return ChainReport(
        delta, state.time, crossing.bracket, crossing.relative_width, A, B, C, D, N, rr0, rr1, rr2, slacks
    )

"""Command-line driver: one subcommand per experiment, JSON for machines and aligned text for people.

Initial conditions are given in a small language:

    field    := term (("+" | "-") term)*
    term     := NUMBER | [NUMBER "*"] "Y(" j "," k ")" ["[" idx "]"]
    extremal := "extremal(" c ";" eta_1 "," ... "," eta_{n+1} ")"

Y(j,k)[idx] is the real test harmonic sqrt(2) Re Y_idx of H_{j,k} with unit
L^2 norm in the probability measure; eta entries are Python complex literals
such as 0.3 or 0.1j.  Exit status: 0 when every asserted check passes, 1 when
a check fails (named on stderr), 2 for usage errors.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .extremals import ExtremalField, ExtremalParams, distance_to_sobolev_manifold
from .functionals import duality_identity_sides, hls_heisenberg_constant, sharp_constants, sobolev_deficit
from .harmonics import Measure, SpectralField, cached_basis, eigen_residual, project, real_harmonic
from .heisenberg import CRDimension
from .quadrature import quadrature_grid, sphere_area


class UsageError(Exception):
    """Bad input that argparse could not catch (exit status 2)."""


@dataclass
class RunConfig:
    command: str
    n: int
    D: Optional[int] = None
    seed: int = 0
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Outcome:
    values: dict
    checks: List[Check] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)


# -- initial conditions ----------------------------------------------------------------

_TERM = re.compile(
    r"^\s*(?:(?P<coef>[0-9.eE+-]+)\s*\*\s*)?Y\(\s*(?P<j>\d+)\s*,\s*(?P<k>\d+)\s*\)\s*(?:\[\s*(?P<idx>\d+)\s*\])?\s*$"
)
_EXTREMAL = re.compile(r"^\s*extremal\(\s*(?P<c>[^;]+);(?P<eta>[^)]*)\)\s*$")


def _split_terms(text: str) -> List[tuple]:
    """Split at top-level + and - (not inside brackets or exponents)."""
    terms, depth, start, sign = [], 0, 0, 1.0
    s = text.strip()
    i = 0
    while i < len(s):
        ch = s[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > 0 and s[i - 1] not in "eE*":
            piece = s[start:i].strip()
            if piece:
                terms.append((sign, piece))
            sign = 1.0 if ch == "+" else -1.0
            start = i + 1
        i += 1
    piece = s[start:].strip()
    if piece:
        terms.append((sign, piece))
    if s.startswith("-") and terms and terms[0][1] == "":
        terms = terms[1:]
    return terms


def parse_init(text: str, n: int, D: int):
    """Return a SpectralField (on the cached degree-D basis) or an ExtremalField."""
    m = _EXTREMAL.match(text)
    if m:
        try:
            c = float(m.group("c"))
            eta = tuple(complex(e.strip().replace(" ", "")) for e in m.group("eta").split(","))
        except ValueError as exc:
            raise UsageError(f"cannot parse extremal parameters in {text!r}") from exc
        if len(eta) != n + 1:
            raise UsageError(f"extremal needs {n + 1} eta entries for n = {n}")
        try:
            return ExtremalField(ExtremalParams(c, eta))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    basis = cached_basis(n, D)
    out = SpectralField.zero(basis)
    terms = _split_terms(text)
    if not terms:
        raise UsageError("empty initial condition")
    for sign, piece in terms:
        tm = _TERM.match(piece)
        if tm:
            j, k = int(tm.group("j")), int(tm.group("k"))
            if j + k > D:
                raise UsageError(f"Y({j},{k}) exceeds the basis degree D = {D}")
            coef = float(tm.group("coef")) if tm.group("coef") else 1.0
            idx = int(tm.group("idx") or 0)
            if idx >= basis.blocks[(j, k)].dim:
                raise UsageError(f"index {idx} out of range for H_({j},{k})")
            out = out + real_harmonic(basis, j, k, idx) * (sign * coef)
            continue
        try:
            value = float(piece)
        except ValueError as exc:
            raise UsageError(f"cannot parse term {piece!r}") from exc
        out = out + SpectralField.constant(basis) * (sign * value)
    return out


def as_spectral(u, n: int, D: int) -> SpectralField:
    if isinstance(u, SpectralField):
        return u
    basis = cached_basis(n, D)
    grid = quadrature_grid(n, 3 * D)
    return project(lambda pts: np.real(u(pts)), basis, grid).real_part()


# -- subcommands ----------------------------------------------------------------------------

def cmd_constants(a) -> Outcome:
    n = a.n
    sc = sharp_constants(n)
    Q = 2 * n + 2
    lhs, rhs = duality_identity_sides(n)
    theorem_c = hls_heisenberg_constant(n)
    scaled = sc.hls_SQ * 2.0 ** (-n * (Q - 2) / Q)
    vals = dict(sc.to_dict())
    vals.update(
        sphere_area=sphere_area(n),
        Q=Q,
        q=CRDimension(n).q,
        hls_SQ_times_2_pow=scaled,
        theorem_c_constant=theorem_c,
        duality_lhs=lhs,
        duality_rhs=rhs,
    )
    checks = [
        Check("hls-heisenberg-consistency", abs(scaled - theorem_c) <= 1e-12 * theorem_c, f"{scaled!r} vs {theorem_c!r}"),
        Check("sharp-constant-duality", abs(lhs - rhs) <= 1e-12 * rhs, f"{lhs!r} vs {rhs!r}"),
    ]
    return Outcome(vals, checks)


def cmd_verify_eigs(a) -> Outcome:
    basis = cached_basis(a.n, a.D)
    worst = max(eigen_residual(basis, i) for i in range(len(basis)))
    return Outcome(
        {"basis_size": len(basis), "max_relative_residual": worst},
        [Check("eigenvalue-law", worst < 1e-9, f"max residual {worst:.3e}")],
    )


def cmd_deficit(a) -> Outcome:
    u = parse_init(a.init, a.n, a.D)
    rep = sobolev_deficit(u, measure=Measure(a.measure))
    scale = max(rep.energy, 1e-300)
    return Outcome(
        rep.to_dict(),
        [Check("sobolev-inequality", rep.deficit >= -1e-8 * scale, f"deficit {rep.deficit:.6e}")],
    )


def cmd_distance(a) -> Outcome:
    u = parse_init(a.init, a.n, a.D)
    res = distance_to_sobolev_manifold(u, seed=a.seed, restarts=a.restarts)
    vals = res.to_dict()
    vals["relative"] = res.squared_distance / u.energy()
    return Outcome(vals, [Check("nonnegative-distance", res.squared_distance >= 0.0)])


def cmd_flow(a) -> Outcome:
    from .flow import YamabeFlow, run

    u0 = as_spectral(parse_init(a.init, a.n, a.D), a.n, a.D)
    flow = YamabeFlow(u0.basis, multiplier=a.multiplier)
    trace, state, _ = run(u0, T=a.tmax, flow=flow, distance_every=a.distance_every, seed=a.seed)
    S0, V0 = trace.samples[0].S, trace.samples[0].V
    inc = trace.max_energy_increase()
    drift = trace.max_volume_drift()
    vals = {
        "final_time": state.time,
        "S0": S0,
        "S_final": trace.samples[-1].S,
        "V0": V0,
        "max_energy_increase": inc,
        "max_volume_drift": drift,
        "final_relative_distance": trace.samples[-1].dist_ratio,
        "dissipation_mismatch": trace.dissipation_mismatch(),
        "rejected_steps": trace.rejected_steps,
        "samples": len(trace.samples),
    }
    checks = [
        Check("energy-monotone", inc <= 1e-8 * S0, f"max increase {inc:.3e}"),
        Check("volume-conserved", drift <= 1e-6 * V0, f"max drift {drift:.3e}"),
    ]
    return Outcome(vals, checks, {"csv": trace.to_csv()})


def cmd_chain(a) -> Outcome:
    from .flow import YamabeFlow, local_to_global_chain, positive_clipped

    u = as_spectral(parse_init(a.init, a.n, a.D), a.n, a.D)
    flow = YamabeFlow(u.basis)
    u0 = positive_clipped(u, flow) if a.clip else u
    rep = local_to_global_chain(u0, a.delta, flow=flow, seed=a.seed)
    names = ["A>=B", "B>=C", "C>=D", "D>=N"]
    checks = [Check(f"chain {nm}", s >= -1e-8, f"slack {s:.3e}") for nm, s in zip(names, rep.slacks)]
    checks.append(Check("crossing-bracket", rep.bracket_relative_width <= 1e-4, f"{rep.bracket_relative_width:.2e}"))
    return Outcome(rep.to_dict(), checks)


def cmd_local_cert(a) -> Outcome:
    from .local_stability import admissible_perturbation, constants_chooser, verify_certificate

    if a.n < 2:
        raise UsageError("the local certificate needs n >= 2 (q must lie in (2, 3]); n = 1 has q = 4")
    params = constants_chooser(a.eps0, n=a.n)
    vals = {"params": params.to_dict()}
    checks = [Check("delta-tilde-representable", params.representable, f"log10 delta_tilde = {params.log10_delta_tilde:.2f}")]
    target = a.lq_sq if a.lq_sq is not None else 0.5 * params.delta_tilde
    if target <= 0:
        return Outcome(vals, checks)
    basis = cached_basis(a.n, a.D)
    rng = np.random.default_rng(a.seed)
    r = admissible_perturbation(basis, rng, target)
    rep = verify_certificate(r, params, enforce_smallness=a.lq_sq is None)
    vals["report"] = rep.to_dict()
    checks += [
        Check("I-terms-nonnegative", rep.terms_nonnegative, f"I = ({rep.I1:.3e}, {rep.I2:.3e}, {rep.I3:.3e})"),
        Check("headline-bound", rep.headline_holds, f"margin {rep.headline_margin:.3e}"),
    ]
    return Outcome(vals, checks)


def cmd_ratio(a) -> Outcome:
    from .local_stability import spectral_ratio

    try:
        v = spectral_ratio(a.j, a.k, a.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return Outcome({"j": a.j, "k": a.k, "n": a.n, "ratio": v})


def cmd_hls(a) -> Outcome:
    from .hls import hls_deficit, hls_stability_check

    g = parse_init(a.init, a.n, a.D)
    rep = hls_deficit(g)
    vals = {"deficit": rep.to_dict()}
    checks = [Check("sharp-hls", rep.deficit >= -1e-8 * max(rep.energy, 1.0), f"deficit {rep.deficit:.6e}")]
    if a.beta is not None:
        if not isinstance(g, SpectralField):
            raise UsageError("the stability check takes a spectral field")
        st = hls_stability_check(g, a.beta, seed=a.seed)
        vals["stability"] = st.to_dict()
    return Outcome(vals, checks)


def cmd_split(a) -> Outcome:
    from .local_stability import pos_neg_split_bound

    u = as_spectral(parse_init(a.init, a.n, a.D), a.n, a.D)
    rep = pos_neg_split_bound(u, seed=a.seed)
    names = ["sign splitting", "concavity gap", "min bound", "half bound", "half bound on u - g+"]
    checks = [Check(nm, s >= -rep.tolerance, f"slack {s:.3e}") for nm, s in zip(names, rep.slacks)]
    return Outcome(rep.to_dict(), checks)


COMMANDS: Dict[str, Callable] = {
    "constants": cmd_constants,
    "verify-eigs": cmd_verify_eigs,
    "deficit": cmd_deficit,
    "distance": cmd_distance,
    "flow": cmd_flow,
    "chain": cmd_chain,
    "local-cert": cmd_local_cert,
    "ratio": cmd_ratio,
    "hls": cmd_hls,
    "split": cmd_split,
}


# -- parser and output -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crstab", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, D_default: Optional[int] = 4, with_D: bool = True):
        sp.add_argument("--n", type=int, default=1, choices=[1, 2] if with_D else None)
        if with_D:
            sp.add_argument("--D", type=int, default=D_default, help="basis degree")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json", action="store_true", help="print JSON instead of text")
        sp.add_argument("--out", help="write the JSON report to this path")

    sp = sub.add_parser("constants", help="sharp constants and their identities")
    common(sp, with_D=False)
    sp = sub.add_parser("verify-eigs", help="symbolic eigenvalue law on the basis")
    common(sp, 6)
    sp = sub.add_parser("deficit", help="Sobolev deficit of an initial condition")
    common(sp)
    sp.add_argument("--init", default="1")
    sp.add_argument("--measure", choices=[m.value for m in Measure], default=Measure.SURFACE.value)
    sp = sub.add_parser("distance", help="squared distance to the extremal manifold")
    common(sp)
    sp.add_argument("--init", default="1 + 0.1*Y(2,0)")
    sp.add_argument("--restarts", type=int, default=8)
    sp = sub.add_parser("flow", help="CR Yamabe flow trace")
    common(sp, 8)
    sp.add_argument("--init", default="1 + 0.3*Y(2,0)")
    sp.add_argument("--tmax", type=float, default=50.0)
    sp.add_argument("--distance-every", type=float, default=5.0)
    sp.add_argument("--multiplier", choices=["galerkin", "mean"], default="galerkin")
    sp.add_argument("--csv", help="write the trace CSV to this path (default: stdout in text mode)")
    sp = sub.add_parser("chain", help="flow-based local-to-global chain")
    common(sp, 8)
    sp.add_argument("--init", default="1 + 0.8*Y(2,0)")
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--no-clip", dest="clip", action="store_false", help="do not clip the initial field positive")
    sp = sub.add_parser("local-cert", help="local certificate near the constant (n >= 2)")
    common(sp, 4, with_D=False)
    sp.add_argument("--D", type=int, default=4)
    sp.add_argument("--eps0", type=float, default=1.0 / 6.0)
    sp.add_argument("--lq-sq", type=float, default=None, help="evaluate at this ||r||_q^2 without the smallness condition")
    sp = sub.add_parser("ratio", help="second-order deficit/distance ratio along H_{j,k}")
    common(sp, with_D=False)
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp = sub.add_parser("hls", help="HLS deficit and stability ratio")
    common(sp)
    sp.add_argument("--init", default="1 + 0.2*Y(2,0)")
    sp.add_argument("--beta", type=float, default=None)
    sp = sub.add_parser("split", help="positive/negative part reduction")
    common(sp, 3)
    sp.add_argument("--init", default="0.3 + Y(1,1) + 0.5*Y(2,0)")
    return p


def _text(outcome: Outcome, config: RunConfig) -> str:
    lines = [f"crstab {config.command} (n = {config.n})"]

    def flat(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                yield from flat(f"{prefix}.{k}" if prefix else str(k), v[k])
        elif isinstance(v, list) and len(v) > 8:
            yield prefix, f"[{len(v)} values]"
        else:
            yield prefix, v

    rows = list(flat("", outcome.values))
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        lines.append(f"  {k.ljust(width)}  {v}")
    for c in outcome.checks:
        lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name} {c.detail}".rstrip())
    return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "n", "D", "seed", "json", "out", "csv")}
    config = RunConfig(args.command, args.n, getattr(args, "D", None), args.seed, opts)
    try:
        outcome = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"crstab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    report = {
        "config": config.to_dict(),
        "values": outcome.values,
        "checks": [asdict(c) for c in outcome.checks],
        "passed": all(c.passed for c in outcome.checks),
    }
    payload = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    csv_text = outcome.artifacts.get("csv")
    if csv_text is not None and getattr(args, "csv", None):
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    if args.json:
        print(payload)
    else:
        print(_text(outcome, config))
        if csv_text is not None and not getattr(args, "csv", None):
            print(csv_text, end="")
    failed = [c.name for c in outcome.checks if not c.passed]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

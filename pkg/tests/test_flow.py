"""Projected CR Yamabe flow."""
import math

import numpy as np
import pytest

from crstab.extremals import ExtremalField, ExtremalParams
from crstab.flow import (
    ChainPreconditionError,
    FlowState,
    PositivityError,
    RatioNotReached,
    YamabeFlow,
    local_to_global_chain,
    positive_clipped,
    run,
)
from crstab.harmonics import SpectralField, build_basis, project, real_harmonic
from crstab.quadrature import quadrature_grid


@pytest.fixture(scope="module")
def flow1():
    return YamabeFlow(build_basis(1, 4))


def test_constant_curvature_values(flow1):
    one = SpectralField.constant(flow1.basis)
    R = flow1.webster_scalar(one.coeffs)
    np.testing.assert_allclose(R, 1.0 / 32.0, rtol=1e-12)  # n^3 / (16 (n+1)) at n = 1
    web = YamabeFlow(flow1.basis, curvature_scale="webster")
    np.testing.assert_allclose(web.webster_scalar(one.coeffs), 2.0, rtol=1e-12)  # n (n+1)


def test_constants_are_fixed_points(flow1):
    for c in (1.0, 2.5):
        u = SpectralField.constant(flow1.basis, c)
        assert flow1.diagnostics(u.coeffs)["var"] < 1e-24
        new, _, _ = flow1.step(FlowState(u, 0.0), 0.3)
        np.testing.assert_allclose(new.u.coeffs, u.coeffs, atol=1e-14)


def test_extremal_is_nearly_stationary():
    basis = build_basis(1, 8)
    flow = YamabeFlow(basis)
    g = ExtremalField(ExtremalParams(1.0, (0.1, 0.05j)))
    u = project(g, basis, quadrature_grid(1, 40)).real_part()
    assert flow.diagnostics(u.coeffs)["var"] < 1e-8
    dt = 0.1
    new, _, _ = flow.step(FlowState(u, 0.0), dt)
    assert np.linalg.norm(new.u.coeffs - u.coeffs) / dt < 1e-6 * np.linalg.norm(u.coeffs)


def test_positivity_error(flow1):
    u = SpectralField.constant(flow1.basis) * -1.0
    with pytest.raises(PositivityError):
        flow1.rhs(u.coeffs)


def test_invalid_options(flow1):
    with pytest.raises(ValueError):
        YamabeFlow(flow1.basis, multiplier="other")
    with pytest.raises(ValueError):
        YamabeFlow(flow1.basis, curvature_scale="other")
    with pytest.raises(ValueError):
        flow1.step(FlowState(SpectralField.constant(flow1.basis)), 0.0)


def test_time_reparametrisation():
    # the two curvature scales differ by the constant factor 64 (n = 1), so
    # the webster flow at time t is the operator flow at time 64 t, step for step
    basis = build_basis(1, 4)
    u0 = SpectralField.constant(basis) + real_harmonic(basis, 2, 0) * 0.3
    op = YamabeFlow(basis)
    web = YamabeFlow(basis, curvature_scale="webster")
    assert math.isclose(web.cn / op.cn, 64.0)
    a = op.advance(FlowState(u0.copy(), 0.0), 0.64)
    b = web.advance(FlowState(u0.copy(), 0.0), 0.01)
    np.testing.assert_allclose(a.u.coeffs, b.u.coeffs, atol=1e-12)


def test_short_run_diagnostics(flow1):
    u0 = SpectralField.constant(flow1.basis) + real_harmonic(flow1.basis, 2, 0) * 0.3
    trace, state, crossing = run(u0, T=2.0, flow=flow1, distance_every=1.0)
    assert crossing is None
    assert math.isclose(state.time, 2.0)
    S0, V0 = trace.samples[0].S, trace.samples[0].V
    assert trace.max_energy_increase() <= 1e-8 * S0
    assert trace.max_volume_drift() < 1e-6
    assert trace.dissipation_mismatch() < 0.05
    assert trace.to_csv().splitlines()[0] == "t,S,V,r,var,dist_ratio"


def test_mean_multiplier_close_to_galerkin():
    basis = build_basis(1, 4)
    u0 = SpectralField.constant(basis) + real_harmonic(basis, 2, 0) * 0.3
    a = YamabeFlow(basis).advance(FlowState(u0.copy()), 1.0)
    b = YamabeFlow(basis, multiplier="mean").advance(FlowState(u0.copy()), 1.0)
    assert np.linalg.norm(a.u.coeffs - b.u.coeffs) < 1e-3 * np.linalg.norm(a.u.coeffs)


def test_run_needs_exactly_one_stop(flow1):
    u0 = SpectralField.constant(flow1.basis)
    with pytest.raises(ValueError):
        run(u0, flow=flow1)
    with pytest.raises(RatioNotReached):
        run(u0, ratio=0.1, flow=flow1)


def test_state_json_round_trip(flow1):
    u = SpectralField.constant(flow1.basis) + real_harmonic(flow1.basis, 1, 1) * 0.2
    st = FlowState(u, 1.25)
    back = FlowState.from_json(st.to_json(), flow1.basis)
    assert back.time == 1.25
    np.testing.assert_array_equal(back.u.coeffs, u.coeffs)
    with pytest.raises(ValueError):
        FlowState.from_json(st.to_json(), build_basis(1, 2))


def test_positive_clipped_and_chain_preconditions(flow1):
    u = SpectralField.constant(flow1.basis) + real_harmonic(flow1.basis, 2, 0) * 0.8
    assert flow1.nodal(u.coeffs).min() < 0
    with pytest.raises(ChainPreconditionError):
        local_to_global_chain(u, 0.1, flow=flow1)
    v = positive_clipped(u, flow1)
    assert flow1.nodal(v.coeffs).min() > 0
    with pytest.raises(ChainPreconditionError):
        local_to_global_chain(SpectralField.constant(flow1.basis) + real_harmonic(flow1.basis, 2, 0) * 0.01, 0.5, flow=flow1)

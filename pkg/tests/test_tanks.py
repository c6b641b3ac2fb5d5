"""Dual-chamber tank dynamics: damping law, valve rates, chamber clamping."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ific.tanks import (
    EPSILON,
    TankParams,
    TankState,
    chamber_damping,
    force_tank_step,
    impedance_tank_step,
    valve_power,
)

# interactive chamber with the default 0.1 J budget, hard threshold at full
INTER = dict(lower=0.0, delta_soft=0.02, delta_hard=0.1)


def damp(e, drain=True, p_drain=1.0, p_recover=10.0):
    return chamber_damping(
        e, INTER["lower"], INTER["delta_soft"], INTER["delta_hard"],
        drain, EPSILON, p_drain, p_recover,
    )


def test_damping_branch_values():
    assert damp(0.1) == 1.0
    assert damp(0.5) == 1.0
    assert damp(0.019) == 1.0 / EPSILON
    assert damp(0.0) == 1.0 / EPSILON


def test_damping_midpoint_oracle():
    # band midpoint, drain exponent p = 1: 1 / (cos(pi/4) + eps)
    mid = 0.5 * (0.02 + 0.1)
    expected = 1.0 / (math.cos(math.pi / 4.0) + 1e-4)
    assert damp(mid) == pytest.approx(expected, rel=1e-12)
    assert damp(mid) == pytest.approx(1.4140135906533668, rel=1e-12)


def test_damping_continuity_at_breakpoints():
    h = 1e-9
    # hard threshold: cosine branch meets 1 (within the clamp)
    assert abs(damp(0.1 - h) - damp(0.1)) <= 2.0 * EPSILON
    # soft threshold: cosine branch meets 1/eps
    assert abs(damp(0.02) - damp(0.02 - h)) <= 2.0 * EPSILON * (1.0 / EPSILON)


@pytest.mark.parametrize("drain", [True, False])
def test_damping_monotone_nonincreasing(drain):
    es = [0.02 + i * (0.08 / 5000.0) for i in range(5001)]
    ds = [damp(e, drain) for e in es]
    assert all(a >= b - 1e-12 for a, b in zip(ds, ds[1:]))


def test_recover_branch_stays_attenuated_longer():
    # p = 10 keeps the factor high through most of the band
    e = 0.05
    assert damp(e, drain=False) > damp(e, drain=True)


def test_params_validation():
    with pytest.raises(ValueError):
        TankParams(total_delta_soft=0.5, total_delta_hard=0.4)
    with pytest.raises(ValueError):
        TankParams(t_load=0.0)
    with pytest.raises(ValueError):
        TankParams(e_total_upper=0.05, e_inter_upper=0.1)


def test_valve_rate_switches_with_interaction_sign():
    params = TankParams.with_budgets(1.0, 0.1, p_valve_drain=0.03, t_load=2.0)
    tank = TankState(z=params.z_max, e_inter=0.05)
    assert valve_power(tank, 1.0, params, 1e-3) == pytest.approx(0.03)
    assert valve_power(tank, -1.0, params, 1e-3) == pytest.approx(0.05)
    # full interactive chamber: no headroom, nothing flows
    assert valve_power(TankState.full(params), -1.0, params, 1e-3) == 0.0


def test_interactive_drain_time_matches_linear_oracle():
    # de/dt = p_valve - kp_pc = 0.03 - 0.5 from a full 0.1 J chamber
    params = TankParams.with_budgets(1.0, 0.1, p_valve_drain=0.03, t_load=2.0)
    tank = TankState.full(params)
    dt = 1e-3
    t = 0.0
    while tank.e_inter > 0.0:
        tank = force_tank_step(tank, params, 0.0, 0.0, 0.5, 1.0, dt)
        t += dt
        assert t < 1.0, "drain did not complete"
    assert t == pytest.approx(0.1 / 0.47, abs=5e-3)


def test_recovery_completes_in_t_load():
    params = TankParams.with_budgets(1.0, 0.1, p_valve_drain=0.03, t_load=2.0)
    tank = TankState(z=params.z_max, e_inter=0.0)
    dt = 1e-3
    t = 0.0
    while tank.d_inter != 1.0 or tank.e_inter < params.e_inter_upper:
        tank = force_tank_step(tank, params, 0.0, 0.0, 0.0, -1.0, dt)
        t += dt
        assert t < 5.0, "recovery did not complete"
    assert t == pytest.approx(params.t_load, abs=2e-3)


def test_lambda_c_zero_only_at_full_chamber():
    params = TankParams.with_budgets(1.0, 0.1, p_valve_drain=0.03, t_load=2.0)
    full = force_tank_step(TankState.full(params), params, 0.0, 0.0, 0.0, -1.0, 1e-3)
    assert full.lambda_c == 0.0
    dented = force_tank_step(
        TankState(z=params.z_max, e_inter=0.09), params, 0.0, 0.0, 0.0, -1.0, 1e-3
    )
    assert dented.lambda_c == 1.0


def test_disabled_interactive_chamber_is_transparent():
    params = TankParams.with_budgets(1.0, 0.1)
    tank = TankState.full(params)
    tank = force_tank_step(tank, params, 0.0, 0.0, 5.0, 10.0, 1e-3,
                           interactive_enabled=False)
    assert tank.d_inter == 1.0
    assert tank.lambda_c == 1.0
    assert tank.e_inter == params.e_inter_upper


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=-50.0, max_value=50.0),
    st.floats(min_value=-50.0, max_value=50.0),
    st.floats(min_value=0.0, max_value=20.0),
    st.floats(min_value=-20.0, max_value=20.0),
    st.integers(min_value=1, max_value=50),
)
def test_chamber_bounds_hold_under_random_powers(reg, cdp, kp_pc, p_c, steps):
    params = TankParams.with_budgets(1.0, 0.1, p_valve_drain=0.03, t_load=2.0)
    tank = TankState.full(params)
    for _ in range(steps):
        tank = force_tank_step(tank, params, reg, cdp, kp_pc, p_c, 1e-3)
        assert params.z_min <= tank.z <= params.z_max + 1e-12
        assert -1e-12 <= tank.e_inter <= min(params.e_inter_upper, tank.e_total) + 1e-12
        assert tank.d_total >= 1.0 and tank.d_inter >= 1.0
        assert tank.discarded >= 0.0 and tank.suppressed >= 0.0


def test_impedance_tank_absorbs_reference_power():
    params = TankParams.with_budgets(1.0, 0.1)
    tank = TankState(z=1.0, e_inter=0.1)
    before = tank.e_total
    tank = impedance_tank_step(tank, params, 0.2, 0.05, 0.0, -1.0, 1e-3)
    # positive port power charges the total chamber (factors are 1 here)
    assert tank.e_total == pytest.approx(before + 0.25e-3, rel=1e-6)

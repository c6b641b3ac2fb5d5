"""Force PID, desired-force shaping, sub-port split and the gated controller."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from ific.controller import (
    ControllerConfig,
    ForcePidState,
    GainSet,
    IficController,
    Reference,
    desired_force_world,
    force_pid,
    split_force_ports,
)
from ific.geometry import build_directional_basis, pattern_from_vector
from ific.plant import PlantModel
from ific.tanks import TankParams


def make_gains(R=None):
    return GainSet.from_frame(np.eye(3) if R is None else R)


def make_ref(f_d_frame, twist=None, R=None):
    return Reference(
        position=np.zeros(3),
        orientation=np.zeros(3),
        twist=np.zeros(6) if twist is None else np.asarray(twist, float),
        accel=np.zeros(6),
        f_d_frame=np.asarray(f_d_frame, float),
        rotation=np.eye(3) if R is None else R,
    )


def make_config(**kw):
    return ControllerConfig(
        gains=make_gains(),
        force_tank=TankParams.with_budgets(1.0, 0.1, p_valve_drain=0.03),
        imp_tank=TankParams.with_budgets(1.0, 0.1, p_valve_drain=0.01),
        **kw,
    )


def test_gainset_table_row():
    g = make_gains()
    assert np.allclose(g.k_p, 2.0 * np.eye(6))
    assert np.allclose(g.k_i, 2.0 * np.eye(6))
    assert np.allclose(np.diag(g.k_s), [800.0] * 3 + [25.0] * 3)
    assert np.allclose(np.diag(g.d_d), [300.0] * 3 + [3.0] * 3)


def test_desired_force_cancels_non_force_directions():
    ref = make_ref([0.0, 0.0, -10.0, 0.0, 0.0, 0.0])
    f_ext = np.array([3.0, -4.0, 9.5, 0.2, 0.0, 0.1])
    shaped = desired_force_world(ref, f_ext)
    # selected direction keeps the setpoint, the rest cancels the measurement
    assert shaped[2] == pytest.approx(-10.0)
    assert np.allclose(shaped[[0, 1, 3, 4, 5]], -f_ext[[0, 1, 3, 4, 5]])


rotations = st.integers(min_value=0, max_value=10_000).map(
    lambda s: Rotation.random(random_state=s).as_matrix()
)
wrenches = st.lists(
    st.floats(min_value=-80.0, max_value=80.0), min_size=6, max_size=6
).map(np.array)


@settings(max_examples=100, deadline=None)
@given(rotations, wrenches, st.sampled_from([0, 1, 2, 3, 4, 5]))
def test_shaped_force_kernel_cancellation(R, f_ext, axis):
    f_d = np.zeros(6)
    f_d[axis] = -7.5
    ref = make_ref(f_d, R=R)
    shaped = desired_force_world(ref, f_ext)
    basis = build_directional_basis(R, pattern_from_vector(f_d))
    # the kernel projection of F'_d + F_ext vanishes by construction
    assert np.max(np.abs(basis.kernel @ (shaped + f_ext))) <= 1e-9 * (
        1.0 + np.max(np.abs(f_ext))
    )


def test_pid_integral_windup_clamp():
    gains = make_gains()
    pid = ForcePidState()
    error_force = np.full(6, 50.0)  # persistent large error
    f_d = np.zeros(6)
    for _ in range(5000):
        _, f_id, pid = force_pid(pid, gains, f_d, error_force, np.zeros(6), 1e-3)
    # K_i * integral saturates at the windup limit per axis
    assert np.allclose(gains.k_i @ pid.integral, 20.0, atol=1e-9)


def test_pid_freeze_holds_integral():
    gains = make_gains()
    pid = ForcePidState()
    f_err = np.full(6, 5.0)
    _, _, pid = force_pid(pid, gains, np.zeros(6), f_err, np.zeros(6), 1e-3)
    frozen_integral = pid.integral.copy()
    _, _, pid = force_pid(
        pid, gains, np.zeros(6), f_err, np.zeros(6), 1e-3, freeze_integral=True
    )
    assert np.array_equal(pid.integral, frozen_integral)


def test_pid_rejects_bad_dt():
    with pytest.raises(ValueError):
        force_pid(ForcePidState(), make_gains(), np.zeros(6), np.zeros(6),
                  np.zeros(6), 0.0)


@settings(max_examples=150, deadline=None)
@given(rotations, wrenches, wrenches)
def test_sub_ports_reconstruct_force_output(R, f_ext, f_id):
    gains = make_gains(R)
    f_d = np.zeros(6)
    f_d[2] = -10.0
    ref = make_ref(f_d, R=R)
    shaped = desired_force_world(ref, f_ext)
    basis = build_directional_basis(R, pattern_from_vector(f_d))
    f_f = gains.k_p @ (shaped + f_ext) + f_id
    parts = split_force_ports(f_f, f_ext, shaped, f_id, basis, gains)
    recon = parts[0] + parts[1] + parts[2] + parts[3]
    assert np.max(np.abs(recon - f_f)) <= 1e-9 * (1.0 + np.max(np.abs(f_f)))


def test_pinned_controller_is_transparent():
    ctrl = IficController(make_config(pin_tanks_full=True), PlantModel())
    from ific.plant import PlantState

    ref = make_ref([0, 0, -10.0, 0, 0, 0], twist=[0.1, 0, 0, 0, 0, 0])
    out = ctrl.step(PlantState.at_rest([0, 0, 0]), ref, np.zeros(6), 1e-3)
    assert out.d_ft == out.d_fi == out.d_it == out.d_ii == 1.0
    assert out.lambda_c == 1.0
    assert np.allclose(out.xdot_d_mod, ref.twist)
    assert np.allclose(out.f_total, out.f_f_mod + out.f_imp)


def test_full_interactive_chamber_disables_kernel_damping():
    ctrl = IficController(make_config(), PlantModel())
    from ific.plant import PlantState

    ref = make_ref([0, 0, -10.0, 0, 0, 0], twist=[0.1, 0.1, 0, 0, 0, 0])
    state = PlantState.at_rest([0, 0, 0])
    state.twist = np.array([0.0, 0.0, 0.4, 0.0, 0.0, 0.0])  # kernel-direction motion
    out = ctrl.step(state, ref, np.zeros(6), 1e-3)
    # chamber full, no interaction: lambda_c = 0 so no z damping appears
    assert out.lambda_c == 0.0
    assert out.f_imp[2] == pytest.approx(0.0, abs=1e-9)


def test_modified_twist_slew_limited():
    cfg = make_config()
    ctrl = IficController(cfg, PlantModel())
    from ific.plant import PlantState

    state = PlantState.at_rest([0, 0, 0])
    ref = make_ref([0, 0, -10.0, 0, 0, 0], twist=[0.2, 0, 0, 0, 0, 0])
    out1 = ctrl.step(state, ref, np.zeros(6), 1e-3)
    jumped = make_ref([0, 0, -10.0, 0, 0, 0], twist=[-0.2, 0, 0, 0, 0, 0])
    out2 = ctrl.step(state, jumped, np.zeros(6), 1e-3)
    step = np.abs(out2.xdot_d_mod - out1.xdot_d_mod)
    assert np.all(step <= cfg.twist_slew * 1e-3 + 1e-12)


def test_reset_restores_initial_state():
    ctrl = IficController(make_config(), PlantModel())
    from ific.plant import PlantState

    ref = make_ref([0, 0, -10.0, 0, 0, 0], twist=[0.1, 0, 0, 0, 0, 0])
    state = PlantState.at_rest([0, 0, 0])
    first = ctrl.step(state, ref, np.array([5.0, 0, 0, 0, 0, 0.0]), 1e-3)
    ctrl.reset()
    second = ctrl.step(state, ref, np.array([5.0, 0, 0, 0, 0, 0.0]), 1e-3)
    assert np.array_equal(first.f_total, second.f_total)
    assert first.force_tank.e_inter == second.force_tank.e_inter

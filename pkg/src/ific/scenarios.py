"""Task references, the shipped interaction scenarios and trace metrics.

Two task families: periodic surface wiping (circular xy stroke under a -10 N
normal force) and a slow ultrasound-style line scan under -3 N on a soft
surface.  Scenario builders attach scripted human segments (collisions,
guidance, lift-and-release, arm motion) and pick the environment; the run loop
is a fixed-step reference -> human -> environment -> controller -> plant cycle
logged into a Trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ific.controller import ControllerConfig, GainSet, IficController, Reference
from ific.baselines import DsController, DsParams, LpfController, LpfParams, UficController
from ific.plant import (
    ARM_MOTION,
    GUIDANCE,
    IMPULSE,
    LIFT,
    PUSH,
    SHAKE,
    EnvironmentModel,
    HumanScript,
    PlantModel,
    PlantState,
    ScriptRuntime,
    ScriptSegment,
    environment_wrench,
    plant_step,
)
from ific.tanks import TankParams
from ific.trace import Trace

WIPING = "wiping"
ULTRASOUND_PHANTOM = "ultrasound-phantom"
ULTRASOUND_ARM = "ultrasound-arm"

_TASKS = (WIPING, ULTRASOUND_PHANTOM, ULTRASOUND_ARM)

# human_active codes logged per cycle
HUMAN_NONE = 0.0
HUMAN_IMPULSE = 1.0
HUMAN_GUIDANCE = 2.0
HUMAN_HOLD = 3.0

CONTROLLERS = ("ific", "ufic", "lpf", "ds")


@dataclass(frozen=True)
class TaskParams:
    """Reference-trajectory parameters for one task family."""

    kind: str = WIPING
    amplitude: float = 0.1  # wiping stroke radius [m]
    frequency: float = 0.2  # wiping stroke frequency [Hz]
    scan_speed: float = 0.01  # ultrasound line-scan speed [m/s]
    f_dz: float = -10.0
    surface_height: float = 0.0

    def __post_init__(self):
        if self.kind not in _TASKS:
            raise ValueError(f"unknown task {self.kind!r}")


@dataclass(frozen=True)
class ExperimentParams:
    """One row of gain/tank parameters shared by all controllers in a run."""

    kp: float = 2.0
    ki: float = 2.0
    kd: float = 0.02
    k_s_t: float = 800.0
    k_s_r: float = 25.0
    d_d_t: float = 300.0
    d_d_r: float = 3.0
    e_total_f: float = 1.0
    e_total_i: float = 1.0
    e_inter_f: float = 0.1
    e_inter_i: float = 0.1
    p_valve_f: float = 0.03
    p_valve_i: float = 0.01
    t_load_f: float = 2.0
    t_load_i: float = 2.0
    ufic_budget: float = 0.8
    dt: float = 1e-3


def controller_config(
    params: ExperimentParams,
    e_total_f: float | None = None,
    e_total_i: float | None = None,
) -> ControllerConfig:
    gains = GainSet.from_frame(
        np.eye(3),
        kp=params.kp, ki=params.ki, kd=params.kd,
        k_s_t=params.k_s_t, k_s_r=params.k_s_r,
        d_d_t=params.d_d_t, d_d_r=params.d_d_r,
    )
    force_tank = TankParams.with_budgets(
        e_total_f if e_total_f is not None else params.e_total_f,
        params.e_inter_f,
        p_valve_drain=params.p_valve_f,
        t_load=params.t_load_f,
    )
    imp_tank = TankParams.with_budgets(
        e_total_i if e_total_i is not None else params.e_total_i,
        params.e_inter_i,
        p_valve_drain=params.p_valve_i,
        t_load=params.t_load_i,
    )
    return ControllerConfig(
        gains=gains, force_tank=force_tank, imp_tank=imp_tank, dt=params.dt
    )


def make_controller(
    name: str,
    params: ExperimentParams,
    model: PlantModel | None = None,
    lpf: LpfParams | None = None,
    ds: DsParams | None = None,
):
    """Instantiate a controller by CLI name with shared experiment parameters."""
    model = model or PlantModel()
    if name == "ific":
        return IficController(controller_config(params), model)
    if name == "ufic":
        cfg = controller_config(
            params, e_total_f=params.ufic_budget, e_total_i=params.ufic_budget
        )
        return UficController(cfg, model)
    if name == "lpf":
        return LpfController(controller_config(params), model, lpf or LpfParams())
    if name == "ds":
        return DsController(controller_config(params), model, ds or DsParams())
    raise ValueError(f"unknown controller {name!r}, expected one of {CONTROLLERS}")


def task_reference(t: float, task: TaskParams) -> Reference:
    """Reference pose/twist/accel and frame-local desired wrench at time t."""
    f_d = np.zeros(6)
    f_d[2] = task.f_dz
    if task.kind == WIPING:
        w = 2.0 * math.pi * task.frequency
        a = task.amplitude
        pos = np.array([a * math.sin(w * t), a * math.cos(w * t), task.surface_height])
        twist = np.zeros(6)
        twist[0] = a * w * math.cos(w * t)
        twist[1] = -a * w * math.sin(w * t)
        accel = np.zeros(6)
        accel[0] = -a * w * w * math.sin(w * t)
        accel[1] = -a * w * w * math.cos(w * t)
        motion = np.array([1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    else:
        pos = np.array([task.scan_speed * t, 0.0, task.surface_height])
        twist = np.zeros(6)
        twist[0] = task.scan_speed
        accel = np.zeros(6)
        motion = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    return Reference(
        position=pos,
        orientation=np.zeros(3),
        twist=twist,
        accel=accel,
        f_d_frame=f_d,
        rotation=np.eye(3),
        motion_pattern=motion,
    )


TABLE_ENV = EnvironmentModel(k_e=2.0e4, d_e=200.0)
PHANTOM_ENV = EnvironmentModel(k_e=1.5e3, d_e=50.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one deterministic run needs besides the controller itself."""

    name: str
    task: TaskParams
    duration: float
    environment: EnvironmentModel = TABLE_ENV
    script: HumanScript = field(default_factory=HumanScript)
    params: ExperimentParams = field(default_factory=ExperimentParams)
    noise_std: float = 0.0  # additive Gaussian force noise on F_ext [N], off by default
    noise_seed: int = 0
    event_time: float | None = None  # start of the scored perturbation, if any
    safety_bound: float | None = None  # configured contact-force limit [N]

    def __post_init__(self):
        if self.duration < 0.0:
            raise ValueError("duration must be nonnegative")


def initial_state(cfg: ScenarioConfig) -> PlantState:
    """Start on the reference at the static contact equilibrium penetration."""
    ref0 = task_reference(0.0, cfg.task)
    penetration = abs(cfg.task.f_dz) / cfg.environment.k_e
    pos = ref0.position.copy()
    pos[2] = cfg.task.surface_height - penetration
    state = PlantState.at_rest(pos)
    state.twist = ref0.twist.copy()
    return state


def run_scenario(cfg: ScenarioConfig, controller) -> Trace:
    """Fixed-step simulation of one scenario with one controller.

    Reference, human wrench and environment wrench are evaluated on the
    current state, the controller produces the command wrench, the plant
    integrates.  On divergence the partial trace is preserved on the raised
    exception.
    """
    dt = cfg.params.dt
    n = int(round(cfg.duration / dt))
    model = controller.model if hasattr(controller, "model") else controller.core.model
    ctrl_cfg = controller.config if hasattr(controller, "config") else controller.core.config
    trace = Trace(n, meta={
        "scenario": cfg.name,
        "controller": controller.name,
        "dt": dt,
        "inertia": model.inertia,
        "k_s": ctrl_cfg.gains.k_s,
        "d_d": ctrl_cfg.gains.d_d,
        "inter_hard_f": ctrl_cfg.force_tank.inter_lower + ctrl_cfg.force_tank.inter_delta_hard,
        "inter_hard_i": ctrl_cfg.imp_tank.inter_lower + ctrl_cfg.imp_tank.inter_delta_hard,
        "f_dz": cfg.task.f_dz,
        "event_time": cfg.event_time,
        "safety_bound": cfg.safety_bound,
    })
    controller.reset()
    runtime = ScriptRuntime(cfg.script)
    state = initial_state(cfg)
    rng = np.random.default_rng(cfg.noise_seed) if cfg.noise_std > 0.0 else None

    from ific.plant import SimulationDivergedError

    for k in range(n):
        t = k * dt
        ref = task_reference(t, cfg.task)
        surface_h = cfg.task.surface_height + cfg.script.surface_offset(t)
        f_env = environment_wrench(state, cfg.environment, surface_h)
        f_hum, sensed = runtime.wrench(state, t)
        f_plant = f_env + f_hum
        f_ext = f_plant if sensed else f_env
        if rng is not None:
            noise = np.concatenate([rng.normal(0.0, cfg.noise_std, 3), np.zeros(3)])
            f_ext = f_ext + noise
            f_plant = f_plant + noise
        try:
            out = controller.step(state, ref, f_ext, dt)
            _record(trace, t, state, ref, f_ext, f_plant, f_env, surface_h, cfg.script, out)
            trace.commit()
            state = plant_step(state, model, out.f_total, f_plant, dt)
        except SimulationDivergedError as err:
            err.record["trace"] = trace
            raise
    return trace


def _record(trace, t, state, ref, f_ext, f_plant, f_env, surface_h, script, out):
    row = trace.row_view()
    s = trace.set
    s(row, "t", t)
    s(row, "pose", np.concatenate([state.position, state.orientation]))
    s(row, "twist", state.twist)
    s(row, "xd_mod", out.xd_mod)
    s(row, "vd_mod", out.xdot_d_mod)
    s(row, "xdot_d", ref.twist)
    s(row, "pose_err", np.concatenate([state.position, state.orientation]) - out.xd_mod)
    s(row, "vel_err", state.twist - out.xdot_d_mod)
    s(row, "f_ext", f_ext)
    s(row, "f_ext_plant", f_plant)
    s(row, "f_d_shaped", out.f_d_shaped)
    s(row, "f_f", out.f_f)
    s(row, "f_f_mod", out.f_f_mod)
    s(row, "f_imp", out.f_imp)
    s(row, "f_total", out.f_total)
    s(row, "sub1", out.sub_ports[0])
    s(row, "sub2", out.sub_ports[1])
    s(row, "sub3", out.sub_ports[2])
    s(row, "sub4", out.sub_ports[3])
    s(row, "accel_ff", out.accel_ff)
    s(row, "p_c", out.p_c)
    s(row, "p_u", out.p_u)
    s(row, "power_f", out.power_f)
    s(row, "power_i", out.power_i)
    s(row, "e_ft", out.force_tank.e_total)
    s(row, "e_fi", out.force_tank.e_inter)
    s(row, "e_it", out.imp_tank.e_total)
    s(row, "e_ii", out.imp_tank.e_inter)
    s(row, "d_ft", out.d_ft)
    s(row, "d_fi", out.d_fi)
    s(row, "d_it", out.d_it)
    s(row, "d_ii", out.d_ii)
    s(row, "lambda_c", out.lambda_c)
    s(row, "gate_c", out.gate_c)
    s(row, "gate_u", out.gate_u)
    s(row, "ds_e", out.ds_e)
    s(row, "ds_h", out.ds_h)
    s(row, "surface_h", surface_h)
    s(row, "env_fz", f_env[2])
    s(row, "human_active", _human_code(script, t))
    s(row, "discard_f", out.force_tank.discarded)
    s(row, "suppress_f", out.force_tank.suppressed)
    s(row, "discard_i", out.imp_tank.discarded)
    s(row, "suppress_i", out.imp_tank.suppressed)


def _human_code(script: HumanScript, t: float) -> float:
    seg = script.active_segment(t)
    if seg is None:
        return HUMAN_NONE
    if seg.kind in (IMPULSE, PUSH):
        return HUMAN_IMPULSE
    if seg.kind in (GUIDANCE, LIFT):
        return HUMAN_GUIDANCE
    return HUMAN_HOLD


# --- shipped scenarios -------------------------------------------------------


def wiping_scenario(
    duration: float = 150.0,
    params: ExperimentParams | None = None,
    script: HumanScript | None = None,
    noise_std: float = 0.0,
) -> ScenarioConfig:
    """Periodic wiping on the stiff table under -10 N, with collision pokes
    and one sustained guidance stroke."""
    if script is None:
        script = HumanScript(segments=(
            ScriptSegment(20.0, 20.2, IMPULSE, direction=(0.0, 1.0, 0.0), peak=30.0),
            ScriptSegment(45.0, 45.15, IMPULSE, direction=(1.0, 0.0, 0.0), peak=40.0),
            ScriptSegment(
                80.0, 86.0, GUIDANCE, direction=(0.0, 1.0, 0.0),
                profile=((0.0, 0.0), (1.0, 0.15), (5.0, 0.15), (6.0, 0.0)),
                k_h=2000.0, f_max=60.0, d_h=40.0,
            ),
            ScriptSegment(120.0, 120.1, IMPULSE, direction=(0.0, -1.0, 0.0), peak=50.0),
        ))
    return ScenarioConfig(
        name="wiping",
        task=TaskParams(kind=WIPING, f_dz=-10.0),
        duration=duration,
        environment=TABLE_ENV,
        script=script,
        params=params or ExperimentParams(),
        noise_std=noise_std,
    )


def lift_release_scenario(
    duration: float = 20.0,
    params: ExperimentParams | None = None,
    lift_height: float = 0.1,
) -> ScenarioConfig:
    """Wiping task; the human lifts the tool 0.1 m off the table, holds
    briefly, and lets go.  The recontact impact after release is the scored
    event (release at t = 8 s)."""
    script = HumanScript(segments=(
        ScriptSegment(
            5.0, 8.0, LIFT, direction=(0.0, 0.0, 1.0),
            profile=((0.0, 0.0), (2.0, lift_height), (3.0, lift_height)),
            k_h=6000.0, f_max=150.0, d_h=80.0,
        ),
    ))
    return ScenarioConfig(
        name="lift-release",
        task=TaskParams(kind=WIPING, f_dz=-10.0),
        duration=duration,
        environment=TABLE_ENV,
        script=script,
        params=params or ExperimentParams(),
        event_time=8.0,
    )


def guidance_scenario(
    duration: float = 150.0,
    params: ExperimentParams | None = None,
    noise_std: float = 0.0,
) -> ScenarioConfig:
    """Wiping task with repeated gentle lateral guidance strokes; scored by
    the interaction-efficiency protocol (truncate at 10 J of human work).

    The hand is deliberately light (saturates at 4.5 N): stiff controllers
    keep wiping and pump work into the tether, while tank-based ones yield,
    pause the task and resume once their interaction budget reloads."""
    stroke = ((0.0, 0.0), (1.5, 0.12), (5.0, 0.12))
    segments = []
    t0 = 5.0
    while t0 + 5.0 < duration:
        segments.append(ScriptSegment(
            t0, t0 + 5.0, GUIDANCE, direction=(0.0, 1.0, 0.0),
            profile=stroke, k_h=120.0, f_max=4.5, d_h=2.0,
        ))
        t0 += 10.0
    return ScenarioConfig(
        name="guidance",
        task=TaskParams(kind=WIPING, f_dz=-10.0),
        duration=duration,
        environment=TABLE_ENV,
        script=HumanScript(segments=tuple(segments)),
        params=params or ExperimentParams(),
        noise_std=noise_std,
    )


def phantom_scenario(
    duration: float = 40.0,
    params: ExperimentParams | None = None,
) -> ScenarioConfig:
    """Ultrasound line scan on the soft phantom under -3 N.  Mid-scan the
    probe is knocked toward the phantom (a 40 N, 0.3 s collision); later the
    human pulls it 5 cm off the surface and lets go.  Scored by the contact
    force peak after the collision against the configured safety bound."""
    if params is None:
        params = ExperimentParams(
            kd=0.01, k_s_t=1500.0, e_total_f=2.0, p_valve_f=0.05,
        )
    script = HumanScript(segments=(
        ScriptSegment(15.0, 15.3, IMPULSE, direction=(0.0, 0.0, -1.0), peak=40.0),
        ScriptSegment(
            25.0, 27.5, LIFT, direction=(0.0, 0.0, 1.0),
            profile=((0.0, 0.0), (1.0, 0.05), (2.5, 0.05)),
            k_h=3000.0, f_max=100.0, d_h=50.0,
        ),
    ))
    return ScenarioConfig(
        name="phantom",
        task=TaskParams(kind=ULTRASOUND_PHANTOM, f_dz=-3.0),
        duration=duration,
        environment=PHANTOM_ENV,
        script=script,
        params=params,
        event_time=15.0,
        safety_bound=25.0,
    )


def arm_rise_scenario(
    duration: float = 40.0,
    params: ExperimentParams | None = None,
) -> ScenarioConfig:
    """Ultrasound scan on the arm; the arm suddenly rises 2 cm in 0.1 s and
    settles back, causing a momentary contact loss.  Scored by the peak
    end-effector speed after contact loss."""
    if params is None:
        params = ExperimentParams(
            kd=0.01, k_s_t=1500.0, e_total_f=2.0, p_valve_f=0.05,
        )
    script = HumanScript(segments=(
        ScriptSegment(
            15.0, 18.0, ARM_MOTION,
            profile=((0.0, 0.0), (0.1, 0.02), (1.0, 0.02), (1.2, 0.0)),
        ),
    ))
    return ScenarioConfig(
        name="arm-rise",
        task=TaskParams(kind=ULTRASOUND_ARM, f_dz=-3.0),
        duration=duration,
        environment=PHANTOM_ENV,
        script=script,
        params=params,
        event_time=15.0,
    )


SCENARIOS = {
    "wiping": wiping_scenario,
    "lift-release": lift_release_scenario,
    "guidance": guidance_scenario,
    "phantom": phantom_scenario,
    "arm-rise": arm_rise_scenario,
}


# --- metrics -----------------------------------------------------------------


def force_rmse(trace: Trace, masked: bool = True) -> float:
    """RMSE of the normal-direction force error.

    The error is the z-component of F_ext + F'_d.  With ``masked`` the cycles
    where either interactive chamber sits below its hard threshold (an
    interaction in progress or still being recovered from) are excluded.
    """
    err = trace.block("f_ext")[:, 2] + trace.block("f_d_shaped")[:, 2]
    if masked:
        hard_f = float(trace.meta.get("inter_hard_f", 0.1))
        hard_i = float(trace.meta.get("inter_hard_i", 0.1))
        keep = (trace["e_fi"] >= hard_f - 1e-12) & (trace["e_ii"] >= hard_i - 1e-12)
        if not np.any(keep):
            raise ValueError("mask excludes every cycle")
        err = err[keep]
    return float(np.sqrt(np.mean(err * err)))


def interaction_efficiency(
    trace: Trace, work_budget: float | None = None
) -> tuple[float, float, float]:
    """(e_h, W_h, x_g): end-effector path length per joule of positive U-space work.

    W_h integrates max(P_u, 0); x_g is the total end-effector path length over
    the same span.  With a work budget the run is truncated at the cycle where
    W_h first reaches it (the comparison protocol).
    """
    t = trace["t"]
    if t.size < 2:
        raise ValueError("trace too short")
    dt = float(t[1] - t[0])
    p_u_pos = np.maximum(trace["p_u"], 0.0)
    w_cum = np.cumsum(p_u_pos * dt)
    end = t.size
    if work_budget is not None:
        hit = np.nonzero(w_cum >= work_budget)[0]
        if hit.size:
            end = int(hit[0]) + 1
    w_h = float(w_cum[end - 1])
    if w_h <= 0.0:
        raise ValueError("no positive interaction work in trace")
    pos = trace.block("pose")[:end, :3]
    steps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    x_g = float(np.sum(steps))
    return x_g / w_h, w_h, x_g


def recovery_time(trace: Trace, tank: str = "imp") -> float | None:
    """Time from the last positive interaction-power cycle to d_I back at 1."""
    if tank == "imp":
        p, d = trace["p_u"], trace["d_ii"]
    elif tank == "force":
        p, d = trace["p_c"], trace["d_fi"]
    else:
        raise ValueError("tank must be 'imp' or 'force'")
    drained = np.nonzero((p > 0.0) & (d > 1.0))[0]
    if drained.size == 0:
        return None
    last = int(drained[-1])
    after = np.nonzero(d[last + 1:] == 1.0)[0]
    if after.size == 0:
        return None
    t = trace["t"]
    return float(t[last + 1 + int(after[0])] - t[last])


def peak_contact_force(trace: Trace, window: tuple[float, float] | None = None) -> float:
    """Largest environment normal force in the window [N]."""
    fz = trace["env_fz"]
    if window is not None:
        t = trace["t"]
        sel = (t >= window[0]) & (t <= window[1])
        fz = fz[sel]
    return float(np.max(np.abs(fz))) if fz.size else 0.0


def peak_speed_after_contact_loss(trace: Trace, t_event: float) -> float | None:
    """Peak translational speed between the first contact loss after t_event
    and the following recontact."""
    t = trace["t"]
    fz = trace["env_fz"]
    speed = np.linalg.norm(trace.block("twist")[:, :3], axis=1)
    after = t >= t_event
    loss = np.nonzero(after & (fz <= 0.0))[0]
    if loss.size == 0:
        return None
    start = int(loss[0])
    recontact = np.nonzero(fz[start:] > 0.0)[0]
    stop = start + int(recontact[0]) if recontact.size else t.size
    return float(np.max(speed[start:stop]))


def metrics_report(trace: Trace, work_budget: float | None = None) -> dict:
    """All standard metrics of one trace as a plain dict."""
    report = {
        "scenario": trace.meta.get("scenario"),
        "controller": trace.meta.get("controller"),
        "rmse_masked": None,
        "rmse_unmasked": float(force_rmse(trace, masked=False)),
        "peak_contact_force": peak_contact_force(trace),
        "recovery_time_imp": recovery_time(trace, "imp"),
        "recovery_time_force": recovery_time(trace, "force"),
        "e_h": None,
        "w_h": None,
        "x_g": None,
    }
    try:
        report["rmse_masked"] = float(force_rmse(trace, masked=True))
    except ValueError:
        pass
    try:
        e_h, w_h, x_g = interaction_efficiency(trace, work_budget)
        report.update(e_h=e_h, w_h=w_h, x_g=x_g)
    except ValueError:
        pass
    return report

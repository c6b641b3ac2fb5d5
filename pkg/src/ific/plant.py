"""Cartesian rigid-body end-effector plant with penalty contact and scripted humans.

The plant integrates Lambda xdd = F_ctrl + F_ext with semi-implicit Euler at a
fixed control period.  The environment is a penalty surface (normal spring and
damper, smoothed Coulomb + viscous tangential friction); the human is a set of
scripted wrench segments (impulses, virtual-spring guidance, surface motion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation


class SimulationDivergedError(RuntimeError):
    """Raised when the plant produces a non-finite acceleration."""

    def __init__(self, message: str, record: dict | None = None):
        super().__init__(message)
        self.record = record or {}


class ScriptError(ValueError):
    """Raised for malformed human scripts at load time."""


@dataclass(frozen=True)
class PlantModel:
    """Constant diagonal Cartesian inertia; Coriolis and gravity are zero."""

    inertia: np.ndarray = field(
        default_factory=lambda: np.array([10.0, 10.0, 10.0, 1.0, 1.0, 1.0])
    )

    def __post_init__(self):
        lam = np.asarray(self.inertia, dtype=float)
        if lam.shape != (6,) or np.any(lam <= 0.0):
            raise ValueError("inertia must be a positive 6-vector (diagonal)")
        object.__setattr__(self, "inertia", lam)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.inertia)


@dataclass
class PlantState:
    """End-effector pose (position + rotation vector), twist and time."""

    position: np.ndarray
    orientation: np.ndarray
    twist: np.ndarray
    time: float = 0.0

    @classmethod
    def at_rest(cls, position, orientation=None) -> "PlantState":
        return cls(
            position=np.asarray(position, dtype=float).copy(),
            orientation=np.zeros(3) if orientation is None else np.asarray(orientation, float).copy(),
            twist=np.zeros(6),
            time=0.0,
        )

    def copy(self) -> "PlantState":
        return PlantState(
            position=self.position.copy(),
            orientation=self.orientation.copy(),
            twist=self.twist.copy(),
            time=self.time,
        )


@dataclass(frozen=True)
class EnvironmentModel:
    """Penalty contact surface with viscous + smoothed Coulomb friction."""

    surface_height: float = 0.0
    k_e: float = 2.0e4
    d_e: float = 200.0
    b_v: float = 0.05
    mu_c: float = 0.002
    v_eps: float = 1e-3

    def __post_init__(self):
        if min(self.k_e, self.d_e, self.b_v, self.mu_c) < 0.0:
            raise ValueError("environment coefficients must be nonnegative")


def environment_wrench(
    state: PlantState, env: EnvironmentModel, surface_height: float | None = None
) -> np.ndarray:
    """Reaction wrench of the penalty surface on the end-effector.

    Zero out of contact.  In contact the normal force is the unilateral
    spring-damper max(0, k_e * penetration - d_e * zdot); the tangential force
    is viscous plus Coulomb friction smoothed around zero slip.  Moments are
    zero.
    """
    h = env.surface_height if surface_height is None else surface_height
    penetration = h - state.position[2]
    w = np.zeros(6)
    if penetration <= 0.0:
        return w
    z_dot = state.twist[2]
    f_n = k if (k := env.k_e * penetration - env.d_e * z_dot) > 0.0 else 0.0
    w[2] = f_n
    v_t = state.twist[:2]
    v_norm = math.hypot(v_t[0], v_t[1])
    w[:2] = -(env.b_v + env.mu_c * f_n / (v_norm + env.v_eps)) * v_t
    return w


# --- human scripts -----------------------------------------------------------

IMPULSE = "impulse"
SHAKE = "shake"
GUIDANCE = "sustained-guidance"
LIFT = "lift"
HOLD = "hold"
ARM_MOTION = "arm-motion"
PUSH = "push"

_KINDS = (IMPULSE, SHAKE, GUIDANCE, LIFT, HOLD, ARM_MOTION, PUSH)


@dataclass(frozen=True)
class ScriptSegment:
    """One scripted human action.

    impulse: half-sine force pulse ``peak`` [N] along ``direction``.
    shake: sinusoidal force ``peak``·sin(2π·freq·t) along ``direction``.
    push: constant wrench ``peak``·``direction`` held for the whole segment;
    ``direction`` may be a full 6-vector here (live-session recordings).
    sustained-guidance / lift: virtual hand spring of stiffness ``k_h`` pulling
    the end-effector toward a displacement profile along ``direction``,
    saturated at ``f_max`` and optionally damped by ``d_h``.  The profile is a
    piecewise-linear list of (time offset [s], displacement [m]) pairs
    anchored at the end-effector position on segment entry.
    arm-motion: surface-height offset profile, same (time, offset) encoding.

    ``sensed`` marks whether the wrench acts through the instrumented tool.
    Pushes on the robot body still move the plant but are invisible to the
    force controller.
    """

    t_start: float
    t_end: float
    kind: str
    direction: tuple[float, ...] = (0.0, 1.0, 0.0)
    peak: float = 0.0
    freq: float = 1.0
    profile: tuple[tuple[float, float], ...] = ()
    k_h: float = 2000.0
    f_max: float = 150.0
    d_h: float = 0.0
    sensed: bool = True

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ScriptError(f"unknown segment kind {self.kind!r}")
        if self.t_end <= self.t_start:
            raise ScriptError("segment must have t_end > t_start")
        if self.kind == SHAKE and self.freq <= 0.0:
            raise ScriptError("shake segment needs freq > 0")
        n_dir = len(self.direction)
        if n_dir != 3 and not (self.kind == PUSH and n_dir == 6):
            raise ScriptError("direction must have 3 components (6 allowed for push)")
        if self.kind in (GUIDANCE, LIFT, ARM_MOTION):
            times = [p[0] for p in self.profile]
            if not self.profile or times != sorted(times):
                raise ScriptError(f"{self.kind} segment needs a time-sorted profile")

    def profile_value(self, t_rel: float) -> float:
        pts = self.profile
        if t_rel <= pts[0][0]:
            return pts[0][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t_rel <= t1:
                return v0 + (v1 - v0) * (t_rel - t0) / (t1 - t0)
        return pts[-1][1]


@dataclass(frozen=True)
class HumanScript:
    """Ordered, non-overlapping wrench/surface segments."""

    segments: tuple[ScriptSegment, ...] = ()

    def __post_init__(self):
        segs = tuple(self.segments)
        wrench_segs = [s for s in segs if s.kind != ARM_MOTION]
        for a, b in zip(wrench_segs, wrench_segs[1:]):
            if b.t_start < a.t_end:
                raise ScriptError("wrench segments overlap or are out of order")
        arm_segs = [s for s in segs if s.kind == ARM_MOTION]
        for a, b in zip(arm_segs, arm_segs[1:]):
            if b.t_start < a.t_end:
                raise ScriptError("arm-motion segments overlap or are out of order")
        object.__setattr__(self, "segments", segs)

    def active_segment(self, t: float) -> ScriptSegment | None:
        for seg in self.segments:
            if seg.kind != ARM_MOTION and seg.t_start <= t < seg.t_end:
                return seg
        return None

    def guidance_active(self, t: float) -> bool:
        seg = self.active_segment(t)
        return seg is not None and seg.kind in (GUIDANCE, LIFT)

    def surface_offset(self, t: float) -> float:
        for seg in self.segments:
            if seg.kind == ARM_MOTION and seg.t_start <= t < seg.t_end:
                return seg.profile_value(t - seg.t_start)
        return 0.0


class ScriptRuntime:
    """Per-run script evaluation state (guidance anchors captured on entry)."""

    def __init__(self, script: HumanScript):
        self.script = script
        self._anchors: dict[int, np.ndarray] = {}

    def reset(self) -> None:
        self._anchors.clear()

    def wrench(self, state: PlantState, t: float) -> tuple[np.ndarray, bool]:
        """Human wrench at time t, plus whether the tool sensor sees it."""
        w = np.zeros(6)
        seg = self.script.active_segment(t)
        if seg is None or seg.kind == HOLD:
            return w, True
        t_rel = t - seg.t_start
        direction = np.asarray(seg.direction, dtype=float)
        if seg.kind == PUSH:
            w[: direction.size] = seg.peak * direction
            return w, seg.sensed
        if seg.kind == IMPULSE:
            duration = seg.t_end - seg.t_start
            w[:3] = seg.peak * math.sin(math.pi * t_rel / duration) * direction
            return w, seg.sensed
        if seg.kind == SHAKE:
            w[:3] = seg.peak * math.sin(2.0 * math.pi * seg.freq * t_rel) * direction
            return w, seg.sensed
        # virtual-hand spring (guidance / lift)
        key = id(seg)
        anchor = self._anchors.get(key)
        if anchor is None:
            anchor = state.position.copy()
            self._anchors[key] = anchor
        target = anchor + seg.profile_value(t_rel) * direction
        f = seg.k_h * (target - state.position) - seg.d_h * state.twist[:3]
        norm = np.linalg.norm(f)
        if norm > seg.f_max:
            f *= seg.f_max / norm
        w[:3] = f
        return w, seg.sensed


def plant_step(
    state: PlantState,
    model: PlantModel,
    f_ctrl: np.ndarray,
    f_ext: np.ndarray,
    dt: float,
) -> PlantState:
    """Semi-implicit Euler step of the Cartesian dynamics."""
    accel = (f_ctrl + f_ext) / model.inertia
    if not np.all(np.isfinite(accel)):
        raise SimulationDivergedError(
            "non-finite acceleration",
            record={"time": state.time, "f_ctrl": f_ctrl, "f_ext": f_ext},
        )
    twist = state.twist + accel * dt
    position = state.position + twist[:3] * dt
    omega = twist[3:]
    if omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2] > 1e-24:
        r_new = Rotation.from_rotvec(omega * dt) * Rotation.from_rotvec(state.orientation)
        orientation = r_new.as_rotvec()
    else:
        orientation = state.orientation
    return PlantState(
        position=position, orientation=orientation, twist=twist, time=state.time + dt
    )


def kinetic_energy(state: PlantState, model: PlantModel) -> float:
    return 0.5 * float(state.twist @ (model.inertia * state.twist))

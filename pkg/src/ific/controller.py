"""Unified force-impedance control law and the tank-gated IFIC orchestration.

The force channel is a world-frame wrench PID on the shaped desired force; the
impedance channel is a Cartesian stiffness/damping law with directional
damping split by the impedance basis.  ``IficController`` composes both with
the dual-chamber tanks: the force output is divided by the force-tank damping
factors and the desired twist by the impedance-tank factors, with the
position setpoint integrating the modified twist (it freezes while the
impedance tank is drained and resumes without spring-back).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ific.geometry import (
    DirectionalBasis,
    block_rotation,
    build_directional_basis,
    pattern_from_vector,
    rotate_gain,
)
from ific.plant import PlantModel, PlantState
from ific.tanks import TankParams, TankState, force_tank_step, impedance_tank_step


class DecompositionError(RuntimeError):
    """Sub-port decomposition failed to reconstruct the force output."""


@dataclass(frozen=True)
class GainSet:
    """World-frame controller gains.

    k_p, k_i, k_d act on wrench errors; k_s and d_d are the impedance
    stiffness and damping.  kp_scalar is the proportional magnitude used to
    scale C-space interaction-power drains.
    """

    k_p: np.ndarray
    k_i: np.ndarray
    k_d: np.ndarray
    k_s: np.ndarray
    d_d: np.ndarray
    kp_scalar: float = 2.0

    @classmethod
    def from_frame(
        cls,
        R: np.ndarray,
        kp: float = 2.0,
        ki: float = 2.0,
        kd: float = 0.02,
        k_s_t: float = 800.0,
        k_s_r: float = 25.0,
        d_d_t: float = 300.0,
        d_d_r: float = 3.0,
    ) -> "GainSet":
        """Rotate diagonal force-frame PID gains into the world frame."""
        eye = np.eye(6)
        imp_diag = np.array([k_s_t] * 3 + [k_s_r] * 3)
        dmp_diag = np.array([d_d_t] * 3 + [d_d_r] * 3)
        return cls(
            k_p=rotate_gain(kp * eye, R),
            k_i=rotate_gain(ki * eye, R),
            k_d=rotate_gain(kd * eye, R),
            k_s=np.diag(imp_diag),
            d_d=np.diag(dmp_diag),
            kp_scalar=kp,
        )


@dataclass(frozen=True)
class Reference:
    """Desired pose/twist/acceleration plus the frame-local desired wrench."""

    position: np.ndarray
    orientation: np.ndarray
    twist: np.ndarray
    accel: np.ndarray
    f_d_frame: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    motion_pattern: np.ndarray | None = None

    def pose(self) -> np.ndarray:
        return np.concatenate([self.position, self.orientation])


@dataclass
class ForcePidState:
    integral: np.ndarray = field(default_factory=lambda: np.zeros(6))
    prev_error: np.ndarray = field(default_factory=lambda: np.zeros(6))
    filtered_rate: np.ndarray = field(default_factory=lambda: np.zeros(6))
    primed: bool = False


@dataclass
class ControllerOutput:
    """Everything one control cycle produces, for command and telemetry."""

    f_f: np.ndarray
    f_d_shaped: np.ndarray
    f_f_mod: np.ndarray
    f_imp: np.ndarray
    f_total: np.ndarray
    xdot_d_mod: np.ndarray
    xd_mod: np.ndarray
    sub_ports: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    lambda_c: float
    d_ft: float
    d_fi: float
    d_it: float
    d_ii: float
    p_c: float
    p_u: float
    power_f: float
    power_i: float
    force_tank: TankState
    imp_tank: TankState
    accel_ff: np.ndarray
    gate_c: float = 1.0
    gate_u: float = 1.0
    ds_e: float = 0.0
    ds_h: float = 0.0


def desired_force_world(ref: Reference, f_ext: np.ndarray) -> np.ndarray:
    """Shape the desired wrench so non-force directions cancel -F_ext.

    F'_d = R6 (F_d^frame + (pattern - 1) * F_ext^frame) with the external
    wrench expressed in the force frame.
    """
    r6 = block_rotation(ref.rotation)
    pattern = pattern_from_vector(ref.f_d_frame)
    f_ext_frame = r6.T @ f_ext
    return r6 @ (ref.f_d_frame + (pattern - 1.0) * f_ext_frame)


def force_pid(
    pid: ForcePidState,
    gains: GainSet,
    f_d_world: np.ndarray,
    f_d_shaped: np.ndarray,
    f_ext: np.ndarray,
    dt: float,
    windup_limit: float = 20.0,
    rate_cutoff_hz: float = 50.0,
    freeze_integral: bool = False,
) -> tuple[np.ndarray, np.ndarray, ForcePidState]:
    """Wrench PID: returns (F_f, integral+derivative+feedforward part, state').

    The proportional channel acts on F_ext + F'_d; the integral is clamped so
    K_i * integral stays within +/-windup_limit per axis; the derivative uses
    a first-order filtered finite difference.  ``freeze_integral`` holds the
    integral (conditional anti-windup while the output is detached).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    error = f_d_shaped + f_ext
    integral = pid.integral if freeze_integral else pid.integral + error * dt
    ki_diag = np.diag(gains.k_i)
    limits = np.where(ki_diag > 0.0, windup_limit / np.maximum(ki_diag, 1e-12), np.inf)
    integral = np.clip(integral, -limits, limits)

    alpha = dt / (dt + 1.0 / (2.0 * np.pi * rate_cutoff_hz))
    raw_rate = (error - pid.prev_error) / dt if pid.primed else np.zeros(6)
    filtered = pid.filtered_rate + alpha * (raw_rate - pid.filtered_rate)

    f_id = gains.k_i @ integral + gains.k_d @ filtered + f_d_world
    f_f = gains.k_p @ error + f_id
    new_state = ForcePidState(
        integral=integral, prev_error=error, filtered_rate=filtered, primed=True
    )
    return f_f, f_id, new_state


def split_force_ports(
    f_f: np.ndarray,
    f_ext: np.ndarray,
    f_d_shaped: np.ndarray,
    f_id: np.ndarray,
    basis_w: DirectionalBasis,
    gains: GainSet,
    residual_tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split F_f into its four sub-port wrenches.

    (Kp [D_w] F_ext, F_reg, Kp <D_w> F_ext, Kp <D_w> F'_d) with
    F_reg = Kp [D_w] F'_d + F_id; the parts must reconstruct F_f.
    """
    kp_span = gains.k_p @ basis_w.span
    kp_kernel = gains.k_p @ basis_w.kernel
    part1 = kp_span @ f_ext
    part2 = kp_span @ f_d_shaped + f_id
    part3 = kp_kernel @ f_ext
    part4 = kp_kernel @ f_d_shaped
    residual = np.max(np.abs(part1 + part2 + part3 + part4 - f_f))
    if residual > residual_tol * (1.0 + np.max(np.abs(f_f))):
        raise DecompositionError(f"sub-port residual {residual:.3e}")
    return part1, part2, part3, part4


def impedance_wrench(
    pose_error: np.ndarray,
    vel_error: np.ndarray,
    xdot: np.ndarray,
    accel_ff: np.ndarray,
    lambda_c: float,
    basis_i: DirectionalBasis,
    gains: GainSet,
    model: PlantModel,
) -> np.ndarray:
    """Impedance wrench with directional damping.

    Lambda a_ff - lambda_c D_d <D_i> xdot - D_d [D_i] vel_err - K_s pose_err.
    Kernel-direction damping acts on the absolute twist and is gated by
    lambda_c; span-direction damping acts on the tracking error.
    """
    f = model.inertia * accel_ff
    f -= gains.d_d @ (basis_i.span @ vel_error)
    if lambda_c != 0.0:
        f -= lambda_c * (gains.d_d @ (basis_i.kernel @ xdot))
    f -= gains.k_s @ pose_error
    return f


class _BasisCache:
    """Rebuild directional bases only when rotation or pattern change."""

    def __init__(self):
        self._key = None
        self.basis: DirectionalBasis | None = None
        self.premul: dict[str, np.ndarray] = {}

    def get(self, R: np.ndarray, pattern: np.ndarray, gains: GainSet) -> DirectionalBasis:
        key = (R.tobytes(), pattern.tobytes())
        if key != self._key:
            self._key = key
            self.basis = build_directional_basis(R, pattern)
            self.premul = {
                "kp_span": gains.k_p @ self.basis.span,
                "kp_kernel": gains.k_p @ self.basis.kernel,
                "dd_span": gains.d_d @ self.basis.span,
                "dd_kernel": gains.d_d @ self.basis.kernel,
            }
        return self.basis


@dataclass(frozen=True)
class ControllerConfig:
    gains: GainSet
    force_tank: TankParams
    imp_tank: TankParams
    dt: float = 1e-3
    windup_limit: float = 20.0
    rate_cutoff_hz: float = 50.0
    # bound on the modified desired twist's rate of change [m/s^2, rad/s^2].
    # Task references stay well below it; damping-factor switches would
    # otherwise step xdot'_d instantly and the storage in the error
    # coordinate with it.  Ramping at this rate keeps the tracking error
    # small enough that the span damping dissipates the transition energy.
    twist_slew: float = 0.25
    interactive_chambers: bool = True
    pin_tanks_full: bool = False


class IficController:
    """Tank-gated unified force-impedance controller.

    Per cycle: build the shaped desired force and the PID force output, split
    it into sub-ports, update the force tank then the impedance tank from the
    measured interaction powers, attenuate the force output and desired twist
    by the resulting damping factors, integrate the modified setpoint, and
    emit the impedance wrench.  With ``interactive_chambers`` disabled this
    is the UFIC baseline; with ``pin_tanks_full`` both tanks are held
    transparent (d = 1, lambda_c = 1).
    """

    name = "ific"

    def __init__(self, config: ControllerConfig, model: PlantModel):
        self.config = config
        self.model = model
        self._basis_w = _BasisCache()
        self._basis_i = _BasisCache()
        self.reset()

    def reset(self) -> None:
        cfg = self.config
        self.pid = ForcePidState()
        self.force_tank = TankState.full(cfg.force_tank)
        self.imp_tank = TankState.full(cfg.imp_tank)
        if cfg.pin_tanks_full or not cfg.interactive_chambers:
            self.force_tank = replace(self.force_tank, lambda_c=1.0)
        self.xd_mod: np.ndarray | None = None  # modified setpoint (pos3 + rotvec3)
        self.prev_xdot_d_mod: np.ndarray | None = None
        self.force_detached = False  # previous cycle's output strongly attenuated

    def step(self, state: PlantState, ref: Reference, f_ext: np.ndarray, dt: float) -> ControllerOutput:
        cfg = self.config
        gains = cfg.gains
        force_pattern = pattern_from_vector(ref.f_d_frame)
        motion_pattern = (
            ref.motion_pattern
            if ref.motion_pattern is not None
            else pattern_from_vector(ref.twist)
        )
        basis_w = self._basis_w.get(ref.rotation, force_pattern, gains)
        basis_i = self._basis_i.get(ref.rotation, motion_pattern, gains)
        pre_w = self._basis_w.premul
        pre_i = self._basis_i.premul

        if self.xd_mod is None:
            self.xd_mod = ref.pose().copy()
            self.prev_xdot_d_mod = ref.twist.copy()

        r6 = block_rotation(ref.rotation)
        f_d_world = r6 @ ref.f_d_frame
        f_d_shaped = desired_force_world(ref, f_ext)
        f_f, f_id, self.pid = force_pid(
            self.pid, gains, f_d_world, f_d_shaped, f_ext, dt,
            cfg.windup_limit, cfg.rate_cutoff_hz,
            freeze_integral=self.force_detached,
        )
        sub_ports = split_force_ports(f_f, f_ext, f_d_shaped, f_id, basis_w, gains)
        f_reg = sub_ports[1]

        xdot = state.twist
        p_c = float(xdot @ (basis_w.span @ f_ext))
        p_u = float(xdot @ (basis_w.kernel @ f_ext))
        kp_pc = float(xdot @ (pre_w["kp_span"] @ f_ext))
        kp_pu = float(xdot @ (pre_w["kp_kernel"] @ f_ext))

        lambda_prev = self.force_tank.lambda_c
        regulation_power = float(xdot @ f_reg)
        constrained_damping_power = (
            lambda_prev * float(xdot @ (pre_i["dd_kernel"] @ xdot))
        )
        power_f = -regulation_power + constrained_damping_power
        if cfg.interactive_chambers:
            power_f -= kp_pc

        if cfg.pin_tanks_full:
            d_ft = d_fi = d_it = d_ii = 1.0
            lambda_c = 1.0
            self.force_tank = replace(self.force_tank, lambda_c=1.0)
        else:
            self.force_tank = force_tank_step(
                self.force_tank, cfg.force_tank,
                regulation_power, constrained_damping_power, kp_pc, p_c, dt,
                interactive_enabled=cfg.interactive_chambers,
            )
            d_ft, d_fi = self.force_tank.d_total, self.force_tank.d_inter
            lambda_c = self.force_tank.lambda_c

        f_f_mod = f_f / (d_ft * d_fi)
        self.force_detached = d_ft * d_fi > 2.0

        vel_err_prev = xdot - self.prev_xdot_d_mod
        reference_port_power = float(ref.twist @ (f_f_mod + f_ext))
        tracking_damping_power = float(vel_err_prev @ (pre_i["dd_span"] @ vel_err_prev))
        power_i = reference_port_power + tracking_damping_power

        if not cfg.pin_tanks_full:
            self.imp_tank = impedance_tank_step(
                self.imp_tank, cfg.imp_tank,
                reference_port_power, tracking_damping_power, kp_pu, p_u, dt,
                interactive_enabled=cfg.interactive_chambers,
            )
            d_it, d_ii = self.imp_tank.d_total, self.imp_tank.d_inter

        xdot_d_mod = ref.twist / (d_it * d_ii)
        if not cfg.pin_tanks_full:
            # transparent tanks never step the factors, so no smoothing needed
            step_limit = cfg.twist_slew * dt
            xdot_d_mod = self.prev_xdot_d_mod + np.clip(
                xdot_d_mod - self.prev_xdot_d_mod, -step_limit, step_limit
            )
        accel_ff = (xdot_d_mod - self.prev_xdot_d_mod) / dt
        self.xd_mod = self.xd_mod + xdot_d_mod * dt
        self.prev_xdot_d_mod = xdot_d_mod

        pose_error = np.concatenate(
            [state.position - self.xd_mod[:3], state.orientation - self.xd_mod[3:]]
        )
        vel_error = xdot - xdot_d_mod
        f_imp = self.model.inertia * accel_ff
        f_imp = f_imp - pre_i["dd_span"] @ vel_error
        if lambda_c != 0.0:
            f_imp = f_imp - lambda_c * (pre_i["dd_kernel"] @ xdot)
        f_imp = f_imp - gains.k_s @ pose_error

        return ControllerOutput(
            f_f=f_f,
            f_d_shaped=f_d_shaped,
            f_f_mod=f_f_mod,
            f_imp=f_imp,
            f_total=f_f_mod + f_imp,
            xdot_d_mod=xdot_d_mod,
            xd_mod=self.xd_mod.copy(),
            sub_ports=sub_ports,
            lambda_c=lambda_c,
            d_ft=d_ft,
            d_fi=d_fi,
            d_it=d_it,
            d_ii=d_ii,
            p_c=p_c,
            p_u=p_u,
            power_f=power_f,
            power_i=power_i,
            force_tank=self.force_tank,
            imp_tank=self.imp_tank,
            accel_ff=accel_ff,
        )

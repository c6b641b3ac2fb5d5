"""Valve-controlled dual-chamber virtual energy tanks.

Each tank stores a scalar state z with total energy z^2/2, plus an interactive
sub-chamber that is refilled through a rate-limited valve and drained by
positive interaction power.  Chamber energies map to damping factors through a
piecewise-cosine law; the factors divide the controller outputs, detaching the
corresponding controller when a chamber empties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

EPSILON = 1e-4
Z_MIN = 1e-2


@dataclass(frozen=True)
class TankParams:
    """Budgets, thresholds and valve rates for one dual-chamber tank.

    Thresholds are per chamber: damping is 1 above ``lower + delta_hard``,
    1/eps below ``lower + delta_soft``, cosine-interpolated in between.  The
    interactive chamber's hard threshold defaults to its full budget so that
    recovery from empty takes exactly ``t_load``.
    """

    e_total_upper: float = 1.0
    e_inter_upper: float = 0.1
    total_lower: float = 0.0
    total_delta_soft: float = 0.2
    total_delta_hard: float = 0.8
    inter_lower: float = 0.0
    inter_delta_soft: float = 0.02
    inter_delta_hard: float = 0.1
    p_valve_drain: float = 0.03
    t_load: float = 2.0
    p_drain: float = 1.0
    p_recover: float = 10.0
    eps: float = EPSILON
    z_min: float = Z_MIN

    def __post_init__(self):
        if self.total_delta_hard <= self.total_delta_soft:
            raise ValueError("total chamber: delta_hard must exceed delta_soft")
        if self.inter_delta_hard <= self.inter_delta_soft:
            raise ValueError("interactive chamber: delta_hard must exceed delta_soft")
        if self.t_load <= 0.0:
            raise ValueError("t_load must be positive")
        if self.e_inter_upper > self.e_total_upper:
            raise ValueError("interactive budget cannot exceed the total budget")

    @classmethod
    def with_budgets(cls, e_total_upper: float, e_inter_upper: float, **kw) -> "TankParams":
        """Params with thresholds derived from the budgets (band defaults)."""
        kw.setdefault("total_delta_soft", 0.2 * e_total_upper)
        kw.setdefault("total_delta_hard", 0.8 * e_total_upper)
        kw.setdefault("inter_delta_soft", 0.2 * e_inter_upper)
        kw.setdefault("inter_delta_hard", e_inter_upper)
        return cls(e_total_upper=e_total_upper, e_inter_upper=e_inter_upper, **kw)

    @property
    def z_max(self) -> float:
        return math.sqrt(2.0 * self.e_total_upper)


@dataclass(frozen=True)
class TankState:
    """Tank scalar state, interactive chamber energy and last gate outputs."""

    z: float
    e_inter: float
    d_total: float = 1.0
    d_inter: float = 1.0
    lambda_c: float = 0.0
    discarded: float = 0.0  # cumulative charge energy dropped at saturation [J]
    suppressed: float = 0.0  # cumulative drain energy suppressed at z_min [J]

    @property
    def e_total(self) -> float:
        return 0.5 * self.z * self.z

    @classmethod
    def full(cls, params: TankParams) -> "TankState":
        return cls(z=params.z_max, e_inter=params.e_inter_upper)


def chamber_damping(
    e: float,
    lower: float,
    delta_soft: float,
    delta_hard: float,
    drain_active: bool,
    eps: float = EPSILON,
    p_drain: float = 1.0,
    p_recover: float = 10.0,
) -> float:
    """Damping factor of one chamber from its energy level.

    1 at or above the hard threshold, 1/eps below the soft threshold, and
    (cos((1 - A^p) pi/2) + eps)^-1 in the transition band.  The exponent is
    p_drain while interaction power is positive, p_recover otherwise.  The
    cosine branch bottoms out at 1/(1+eps); the result is clamped to >= 1.
    """
    if e >= lower + delta_hard:
        return 1.0
    if e < lower + delta_soft:
        return 1.0 / eps
    a = (e - lower - delta_soft) / (delta_hard - delta_soft)
    p = p_drain if drain_active else p_recover
    d = 1.0 / (math.cos((1.0 - a**p) * 0.5 * math.pi) + eps)
    return d if d > 1.0 else 1.0


def valve_power(tank: TankState, interaction_power: float, params: TankParams, dt: float) -> float:
    """Valve transfer rate from the task chamber into the interactive chamber.

    A small constant drain-side rate while interaction power is positive,
    the recharge rate e_inter_upper / t_load otherwise; clamped so the
    interactive chamber never exceeds its budget nor the total energy.
    """
    if interaction_power > 0.0:
        p_v = params.p_valve_drain
    else:
        p_v = params.e_inter_upper / params.t_load
    cap = min(params.e_inter_upper, tank.e_total)
    headroom = max(0.0, cap - tank.e_inter)
    return min(p_v, headroom / dt)


def _tank_step(
    tank: TankState,
    params: TankParams,
    power_in: float,
    inter_drain: float,
    interaction_power: float,
    dt: float,
    interactive_enabled: bool,
) -> TankState:
    """Shared chamber accounting for both tanks.

    power_in is the control power charged to / drawn from the total tank;
    inter_drain is the (nonnegative-gated) interaction power debited from the
    interactive chamber while interaction_power is positive.
    """
    drain_active = interaction_power > 0.0

    # total tank: z' = P / (d z), clamped to [z_min, z_max]
    d_prod = tank.d_total * tank.d_inter
    z_dot = power_in / (d_prod * tank.z)
    z_new = tank.z + z_dot * dt
    discarded = tank.discarded
    suppressed = tank.suppressed
    if z_new > params.z_max:
        discarded += 0.5 * (z_new * z_new - params.z_max * params.z_max)
        z_new = params.z_max
    elif z_new < params.z_min:
        suppressed += 0.5 * (params.z_min * params.z_min - z_new * z_new)
        z_new = params.z_min
    e_total_new = 0.5 * z_new * z_new

    if interactive_enabled:
        p_v = valve_power(replace(tank, z=z_new), interaction_power, params, dt)
        lam = 1.0 if drain_active else 0.0
        e_inter_new = tank.e_inter + (p_v - lam * inter_drain) * dt
        e_inter_new = min(max(e_inter_new, 0.0), min(params.e_inter_upper, e_total_new))
        d_inter = chamber_damping(
            e_inter_new,
            params.inter_lower,
            params.inter_delta_soft,
            params.inter_delta_hard,
            drain_active,
            params.eps,
            params.p_drain,
            params.p_recover,
        )
        lambda_c = 1.0 if e_inter_new < params.inter_lower + params.inter_delta_hard else 0.0
    else:
        # interactive chamber disabled: pinned full and transparent
        e_inter_new = min(params.e_inter_upper, e_total_new)
        d_inter = 1.0
        lambda_c = 1.0

    d_total = chamber_damping(
        e_total_new,
        params.total_lower,
        params.total_delta_soft,
        params.total_delta_hard,
        power_in < 0.0,
        params.eps,
        params.p_drain,
        params.p_recover,
    )

    return TankState(
        z=z_new,
        e_inter=e_inter_new,
        d_total=d_total,
        d_inter=d_inter,
        lambda_c=lambda_c,
        discarded=discarded,
        suppressed=suppressed,
    )


def force_tank_step(
    tank: TankState,
    params: TankParams,
    regulation_power: float,
    constrained_damping_power: float,
    kp_pc: float,
    p_c: float,
    dt: float,
    interactive_enabled: bool = True,
) -> TankState:
    """Advance the force tank one control period.

    The control power input is
    P_f = -regulation_power + constrained_damping_power - kp_pc, where
    regulation_power = xdot . F_reg, constrained_damping_power is the
    lambda_c-gated kernel damping power, and kp_pc = xdot . Kp [D_w] F_ext.
    The interactive chamber is debited kp_pc whenever p_c > 0.

    Without the interactive chamber the C-space interaction port is not
    connected at all, so kp_pc drops out of the tank input too; the tank then
    sees only the controller ports.
    """
    power_in = -regulation_power + constrained_damping_power
    if interactive_enabled:
        power_in -= kp_pc
    return _tank_step(tank, params, power_in, kp_pc, p_c, dt, interactive_enabled)


def impedance_tank_step(
    tank: TankState,
    params: TankParams,
    reference_port_power: float,
    tracking_damping_power: float,
    kp_pu: float,
    p_u: float,
    dt: float,
    interactive_enabled: bool = True,
) -> TankState:
    """Advance the impedance tank one control period.

    The control power input is
    P_i = reference_port_power + tracking_damping_power, where
    reference_port_power = xdot_d . (F'_f + F_ext) uses the unmodified desired
    twist (the tank then absorbs exactly the power of the modified port) and
    tracking_damping_power is the span-projected damping dissipation.  The
    interactive chamber is debited kp_pu whenever p_u > 0.
    """
    power_in = reference_port_power + tracking_damping_power
    return _tank_step(tank, params, power_in, kp_pu, p_u, dt, interactive_enabled)

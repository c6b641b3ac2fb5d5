"""Comparison controllers: UFIC, low-pass-filter gating, and nominal-DS switching.

All three share the unified force/impedance core and emit the same
ControllerOutput shape as IFIC, so the scenario loop can swap them freely.
UFIC is IFIC with the interactive chambers disabled; LPF and DS run the core
with transparent tanks and apply their own gating on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ific.controller import ControllerConfig, ControllerOutput, IficController, Reference
from ific.geometry import directional_basis_cached, pattern_from_vector
from ific.plant import PlantModel, PlantState


class UficController(IficController):
    """Unified force-impedance control with tanks on the controller ports only.

    Interactive chambers never drain (no interaction-power debit), the
    interactive damping factors stay 1 and lambda_c is held at 1.
    """

    name = "ufic"

    def __init__(self, config: ControllerConfig, model: PlantModel):
        super().__init__(replace(config, interactive_chambers=False), model)


@dataclass
class LpfState:
    f_filtered: np.ndarray = field(default_factory=lambda: np.zeros(6))
    gate_c: float = 1.0
    gate_u: float = 1.0


@dataclass(frozen=True)
class LpfParams:
    cutoff_hz: float = 20.0
    threshold: float = 5.0
    ramp_time: float = 0.5


class LpfController:
    """Intent detection by low-pass-filtered force magnitude.

    The external wrench is filtered at 20 Hz; when the filtered norm in a
    space exceeds the 5 N threshold that space's controller output is gated
    to zero, then restored over a fixed ramp once it drops below.
    """

    name = "lpf"

    def __init__(self, config: ControllerConfig, model: PlantModel, params: LpfParams | None = None):
        self.params = params or LpfParams()
        self.core = IficController(replace(config, pin_tanks_full=True), model)
        self.reset()

    def reset(self) -> None:
        self.core.reset()
        self.state = LpfState()

    def _update_gate(self, gate: float, norm: float, dt: float) -> float:
        if norm > self.params.threshold:
            return 0.0
        return min(1.0, gate + dt / self.params.ramp_time)

    def step(self, state: PlantState, ref: Reference, f_ext: np.ndarray, dt: float) -> ControllerOutput:
        p = self.params
        alpha = dt / (dt + 1.0 / (2.0 * math.pi * p.cutoff_hz))
        st = self.state
        st.f_filtered = st.f_filtered + alpha * (f_ext - st.f_filtered)

        basis_w = directional_basis_cached(ref.rotation, pattern_from_vector(ref.f_d_frame))
        norm_c = float(np.linalg.norm(basis_w.span @ st.f_filtered))
        norm_u = float(np.linalg.norm(basis_w.kernel @ st.f_filtered))
        st.gate_c = self._update_gate(st.gate_c, norm_c, dt)
        st.gate_u = self._update_gate(st.gate_u, norm_u, dt)

        out = self.core.step(state, ref, f_ext, dt)
        out.f_f_mod = st.gate_c * out.f_f_mod
        out.f_imp = st.gate_u * out.f_imp
        out.f_total = out.f_f_mod + out.f_imp
        out.gate_c = st.gate_c
        out.gate_u = st.gate_u
        return out


@dataclass
class DsState:
    energy: float = 0.0
    h: float = 0.0
    xdot_a: np.ndarray = field(default_factory=lambda: np.zeros(6))


@dataclass(frozen=True)
class DsParams:
    e_threshold: float = 0.5  # interaction energy that triggers guidance detection [J]
    e_max: float = 2.0
    leak_time: float = 2.0
    admittance_mass: float = 5.0
    admittance_damping: float = 50.0

    def __post_init__(self):
        if self.e_max <= self.e_threshold:
            raise ValueError("e_max must exceed e_threshold")


class DsController:
    """Nominal dynamical-system guidance-ratio switching.

    Positive U-space interaction power accumulates (with exponential
    forgetting) into an interaction energy; past a threshold the guidance
    ratio h blends the task references toward an admittance response:
    xdot_d <- (1 - h) xdot_task + xdot_adm and F_d <- (1 - h) F_task.
    """

    name = "ds"

    def __init__(self, config: ControllerConfig, model: PlantModel, params: DsParams | None = None):
        self.params = params or DsParams()
        self.core = IficController(replace(config, pin_tanks_full=True), model)
        self.reset()

    def reset(self) -> None:
        self.core.reset()
        self.state = DsState()

    def step(self, state: PlantState, ref: Reference, f_ext: np.ndarray, dt: float) -> ControllerOutput:
        p = self.params
        st = self.state
        basis_w = directional_basis_cached(ref.rotation, pattern_from_vector(ref.f_d_frame))
        p_u = float(state.twist @ (basis_w.kernel @ f_ext))

        st.energy += (max(p_u, 0.0) - st.energy / p.leak_time) * dt
        if st.energy <= p.e_threshold:
            st.h = 0.0
        else:
            st.h = min(1.0, (st.energy - p.e_threshold) / (p.e_max - p.e_threshold))

        # first-order admittance on the U-space external wrench (translations)
        f_adm = basis_w.kernel @ f_ext
        acc = (f_adm - p.admittance_damping * st.xdot_a) / p.admittance_mass
        st.xdot_a = st.xdot_a + acc * dt

        mod_ref = replace(
            ref,
            twist=(1.0 - st.h) * ref.twist + st.xdot_a,
            # keep a sliver of the desired-force pattern so the force basis
            # does not collapse at h = 1
            f_d_frame=max(1.0 - st.h, 1e-6) * ref.f_d_frame,
        )
        out = self.core.step(state, mod_ref, f_ext, dt)
        out.ds_e = st.energy
        out.ds_h = st.h
        return out

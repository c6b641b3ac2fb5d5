"""Energy bookkeeping: storage function, port power balance and the passivity audit.

The audit works on logged run traces.  Storage differences are quadratic in
the logged samples and therefore exact; the supply integral uses the midpoint
velocity against the zero-order-held external wrench, which is exactly the
energy the environment injects into the discrete plant.  The audit therefore
checks the real discrete system, not a smoothed continuous idealization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL_ABS = 1e-3  # [J]
DEFAULT_TOL_RATE = 1e-4  # [J/s]


@dataclass(frozen=True)
class StorageBreakdown:
    """Storage function value and its four constituents at one sample."""

    kinetic: float
    elastic: float
    force_tank: float
    imp_tank: float

    @property
    def total(self) -> float:
        return self.kinetic + self.elastic + self.force_tank + self.imp_tank


def storage_breakdown(
    vel_error: np.ndarray,
    pose_error: np.ndarray,
    inertia: np.ndarray,
    k_s: np.ndarray,
    e_force_tank: float,
    e_imp_tank: float,
) -> StorageBreakdown:
    """Storage from the tracking errors against the modified reference."""
    vel_error = np.asarray(vel_error, dtype=float)
    pose_error = np.asarray(pose_error, dtype=float)
    return StorageBreakdown(
        kinetic=0.5 * float(vel_error @ (np.asarray(inertia, float) * vel_error)),
        elastic=0.5 * float(pose_error @ (np.asarray(k_s, float) @ pose_error)),
        force_tank=float(e_force_tank),
        imp_tank=float(e_imp_tank),
    )


def port_balance_residual(
    xdot: np.ndarray,
    xdot_d: np.ndarray,
    f_ext: np.ndarray,
    f_f: np.ndarray,
    kp_span_f_ext: np.ndarray,
    f_reg: np.ndarray,
) -> tuple[float, float]:
    """Three-port power sum minus the external interaction power.

    The ports are (flow, effort):
      (xdot - xdot_d, F_ext + F_f), (xdot, -(Kp [D_w] F_ext + F_reg)),
      (xdot_d, F_ext + F_f).
    Their powers must sum to xdot . F_ext.  Returns (absolute residual,
    normalization scale); callers divide to get a relative residual.

    Arrays may be batched with the vector axis last.
    """
    xdot = np.asarray(xdot, float)
    xdot_d = np.asarray(xdot_d, float)
    f_ext = np.asarray(f_ext, float)
    f_f = np.asarray(f_f, float)
    u1 = f_ext + f_f
    u2 = -(np.asarray(kp_span_f_ext, float) + np.asarray(f_reg, float))
    p1 = np.sum((xdot - xdot_d) * u1, axis=-1)
    p2 = np.sum(xdot * u2, axis=-1)
    p3 = np.sum(xdot_d * u1, axis=-1)
    p_ext = np.sum(xdot * f_ext, axis=-1)
    residual = np.abs(p1 + p2 + p3 - p_ext)
    scale = 1.0 + np.abs(p1) + np.abs(p2) + np.abs(p3) + np.abs(p_ext)
    return residual, scale


@dataclass(frozen=True)
class AuditReport:
    """Outcome of a passivity audit over one trace."""

    passed: bool
    n_samples: int
    n_violations: int
    first_violation_time: float | None
    worst_margin: float  # max of V(t) - V(0) - W(t) - tol(t), negative if clean
    worst_margin_time: float
    supplied: float  # total external work W(T) [J]
    storage_delta: float  # V(T) - V(0) [J]
    dissipated: float  # W(T) - (V(T) - V(0)) [J]
    tol_abs: float
    tol_rate: float


def audit_arrays(
    t: np.ndarray,
    storage: np.ndarray,
    supply_rate: np.ndarray,
    tol_abs: float = DEFAULT_TOL_ABS,
    tol_rate: float = DEFAULT_TOL_RATE,
) -> AuditReport:
    """Check V(t) - V(0) <= W(t) + tol_abs + tol_rate * t at every sample.

    supply_rate[k] is the discrete per-step supplied power over [t_k, t_k+1];
    its last entry is ignored (there is no step after the final sample).
    """
    t = np.asarray(t, float)
    storage = np.asarray(storage, float)
    n = t.size
    if storage.size != n or n < 2:
        raise ValueError("need matching time/storage arrays with >= 2 samples")
    dt = np.diff(t)
    work = np.concatenate([[0.0], np.cumsum(np.asarray(supply_rate, float)[:-1] * dt)])
    margin = (storage - storage[0]) - work - (tol_abs + tol_rate * (t - t[0]))
    violations = margin > 0.0
    n_viol = int(np.count_nonzero(violations))
    worst = int(np.argmax(margin))
    return AuditReport(
        passed=n_viol == 0,
        n_samples=int(n),
        n_violations=n_viol,
        first_violation_time=float(t[np.argmax(violations)]) if n_viol else None,
        worst_margin=float(margin[worst]),
        worst_margin_time=float(t[worst]),
        supplied=float(work[-1]),
        storage_delta=float(storage[-1] - storage[0]),
        dissipated=float(work[-1] - (storage[-1] - storage[0])),
        tol_abs=tol_abs,
        tol_rate=tol_rate,
    )


def audit_trace(trace, tol_abs: float = DEFAULT_TOL_ABS, tol_rate: float = DEFAULT_TOL_RATE) -> AuditReport:
    """Passivity audit of a recorded run.

    Storage is taken from the logged tracking errors and tank energies; the
    supply rate is the midpoint-velocity work rate of the external wrench
    actually applied to the plant (sensed or not), which matches the discrete
    plant update exactly.
    """
    t = trace["t"]
    vel_err = trace.block("vel_err")
    pose_err = trace.block("pose_err")
    inertia = np.asarray(trace.meta["inertia"], float)
    k_s = np.asarray(trace.meta["k_s"], float)
    kinetic = 0.5 * np.einsum("ij,j,ij->i", vel_err, inertia, vel_err)
    elastic = 0.5 * np.einsum("ij,jk,ik->i", pose_err, k_s, pose_err)
    storage = kinetic + elastic + trace["e_ft"] + trace["e_it"]

    twist = trace.block("twist")
    f_ext = trace.block("f_ext_plant")
    v_mid = twist.copy()
    v_mid[:-1] = 0.5 * (twist[:-1] + twist[1:])
    supply_rate = np.sum(v_mid * f_ext, axis=1)
    return audit_arrays(t, storage, supply_rate, tol_abs, tol_rate)


def trace_port_residuals(trace) -> tuple[np.ndarray, np.ndarray]:
    """Per-cycle port-balance residuals and scales for a recorded run."""
    return port_balance_residual(
        trace.block("twist"),
        trace.block("xdot_d"),
        trace.block("f_ext"),
        trace.block("f_f"),
        trace.block("sub1"),
        trace.block("sub2"),
    )

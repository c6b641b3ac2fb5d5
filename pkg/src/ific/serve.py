"""Realtime bridge: 1 kHz physics on its own thread, WebSocket telemetry on top.

The physics loop is wall-clock paced but never skips a step; when the host
falls behind it simply runs flat out until caught up.  Clients talk JSON over
a WebSocket: they receive ~30 Hz state snapshots and send wrench / parameter /
transport commands.  Live wrenches are recorded as constant-push script
segments in simulation time, so a finished session can be replayed through
the batch scenario runner and produces the same trace.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import queue
import threading
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from ific.baselines import DsParams, LpfParams
from ific.plant import (
    PUSH,
    HumanScript,
    ScriptSegment,
    SimulationDivergedError,
    environment_wrench,
    plant_step,
)
from ific.scenarios import (
    CONTROLLERS,
    ScenarioConfig,
    _record,
    initial_state,
    make_controller,
    task_reference,
)
from ific.trace import Trace

log = logging.getLogger("ific.serve")

FORCE_LIMIT = 50.0  # [N] per axis on live wrenches
TORQUE_LIMIT = 5.0  # [N·m] per axis
SNAPSHOT_HZ = 30.0

# live-tunable parameters: valve rates, loading times and budgets only
PARAM_WHITELIST = (
    "p_valve_f", "p_valve_i", "t_load_f", "t_load_i",
    "e_total_f", "e_total_i", "e_inter_f", "e_inter_i",
)


def clamp_wrench(value) -> np.ndarray:
    w = np.asarray(value, dtype=float)
    if w.shape != (6,):
        raise ValueError("wrench must have 6 components")
    if not np.all(np.isfinite(w)):
        raise ValueError("wrench must be finite")
    w[:3] = np.clip(w[:3], -FORCE_LIMIT, FORCE_LIMIT)
    w[3:] = np.clip(w[3:], -TORQUE_LIMIT, TORQUE_LIMIT)
    return w


class LiveSession:
    """Single simulation whose human input arrives live instead of scripted.

    The base scenario supplies task, environment and parameters; scripted
    human segments are ignored in live mode.  All stepping goes through the
    same reference/environment/controller/plant functions as the batch
    runner, and injected wrenches are logged as push segments so
    ``recorded_scenario()`` reproduces the session offline.
    """

    def __init__(self, scenario: ScenarioConfig, controller_name: str = "ific",
                 lpf: LpfParams | None = None, ds: DsParams | None = None):
        self.base = dataclasses.replace(scenario, script=HumanScript())
        self.lpf = lpf or LpfParams()
        self.ds = ds or DsParams()
        self.controller_name = controller_name
        self.paused = False
        self._lock = threading.Lock()
        self._snapshot: dict | None = None
        self.reset()

    # -- lifecycle ------------------------------------------------------------

    def reset(self) -> None:
        cfg = self.base
        self.controller = make_controller(
            self.controller_name, cfg.params, lpf=self.lpf, ds=self.ds
        )
        self.controller.reset()
        self.model = getattr(self.controller, "model", None) or self.controller.core.model
        self.state = initial_state(cfg)
        self.k = 0
        self.trace = Trace(int(round(cfg.duration / cfg.params.dt)), meta={
            "scenario": cfg.name + "-live",
            "controller": self.controller_name,
            "dt": cfg.params.dt,
        })
        self._wrench = np.zeros(6)
        self._span_start: float | None = None
        self._segments: list[ScriptSegment] = []
        self._publish(None)

    def select_controller(self, name: str) -> None:
        if name not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        self.controller_name = name
        self.reset()

    def set_param(self, key: str, value: float) -> None:
        if key not in PARAM_WHITELIST:
            raise ValueError(f"parameter {key!r} is not live-tunable")
        value = float(value)
        if not np.isfinite(value) or value <= 0.0:
            raise ValueError(f"parameter {key!r} must be positive and finite")
        params = dataclasses.replace(self.base.params, **{key: value})
        self.base = dataclasses.replace(self.base, params=params)
        self.reset()

    # -- live input -----------------------------------------------------------

    def inject_wrench(self, value) -> None:
        """Hold a clamped external wrench until superseded or zeroed."""
        w = clamp_wrench(value)
        t = self.k * self.base.params.dt
        if np.array_equal(w, self._wrench):
            return
        self._close_span(t)
        self._wrench = w
        if np.any(w != 0.0):
            self._span_start = t

    def _close_span(self, t: float) -> None:
        if self._span_start is not None and t > self._span_start:
            self._segments.append(ScriptSegment(
                self._span_start, t, PUSH,
                direction=tuple(self._wrench), peak=1.0,
            ))
        self._span_start = None

    def recorded_scenario(self) -> ScenarioConfig:
        """The session so far, expressed as a replayable batch scenario."""
        t = self.k * self.base.params.dt
        segments = list(self._segments)
        if self._span_start is not None and t > self._span_start:
            segments.append(ScriptSegment(
                self._span_start, t, PUSH, direction=tuple(self._wrench), peak=1.0,
            ))
        return dataclasses.replace(
            self.base, duration=t, script=HumanScript(segments=tuple(segments))
        )

    # -- stepping -------------------------------------------------------------

    def step(self) -> None:
        """One control period, identical to the batch runner's loop body."""
        cfg = self.base
        dt = cfg.params.dt
        t = self.k * dt
        ref = task_reference(t, cfg.task)
        surface_h = cfg.task.surface_height + cfg.script.surface_offset(t)
        f_env = environment_wrench(self.state, cfg.environment, surface_h)
        f_hum = self._wrench
        f_plant = f_env + f_hum
        f_ext = f_plant
        out = self.controller.step(self.state, ref, f_ext, dt)
        if self.trace.n < self.trace.data.shape[0]:
            _record(self.trace, t, self.state, ref, f_ext, f_plant, f_env,
                    surface_h, cfg.script, out)
            if np.any(self._wrench != 0.0):
                # matches the human_active code a replayed push segment gets
                self.trace.set(self.trace.row_view(), "human_active", 1.0)
            self.trace.commit()
        self.state = plant_step(self.state, self.model, out.f_total, f_plant, dt)
        self.k += 1
        self._publish(out)

    # -- telemetry ------------------------------------------------------------

    def _publish(self, out) -> None:
        snap = {
            "type": "state",
            "t": self.k * self.base.params.dt,
            "controller": self.controller_name,
            "paused": self.paused,
            "pose": [*self.state.position, *self.state.orientation],
            "twist": list(self.state.twist),
            "surface": self.base.task.surface_height,
        }
        if out is not None:
            snap.update({
                "tanks": {
                    "Ef": out.force_tank.e_total, "EIf": out.force_tank.e_inter,
                    "Ei": out.imp_tank.e_total, "EIi": out.imp_tank.e_inter,
                },
                "budgets": {
                    "Ef": self.base.params.e_total_f, "EIf": self.base.params.e_inter_f,
                    "Ei": self.base.params.e_total_i, "EIi": self.base.params.e_inter_i,
                },
                "damping": [out.d_ft, out.d_fi, out.d_it, out.d_ii],
                "powers": {"Pc": out.p_c, "Pu": out.p_u},
                "forces": {
                    "Fext": list(self._wrench),
                    "Fpf": list(out.f_f_mod),
                    "Fimp": list(out.f_imp),
                },
                "lambda_c": out.lambda_c,
                "setpoint": list(out.xd_mod[:3]),
            })
        with self._lock:
            self._snapshot = snap

    def snapshot(self) -> dict | None:
        with self._lock:
            return self._snapshot


class Bridge:
    """Physics thread plus command queue; the WebSocket layer sits on top."""

    def __init__(self, session: LiveSession):
        self.session = session
        self.commands: queue.Queue = queue.Queue(maxsize=256)
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name="physics", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def submit(self, command: dict) -> None:
        self.commands.put_nowait(command)

    def _drain(self) -> None:
        while True:
            try:
                cmd = self.commands.get_nowait()
            except queue.Empty:
                return
            self._apply(cmd)

    def _apply(self, cmd: dict) -> None:
        kind = cmd.get("type")
        s = self.session
        try:
            if kind == "wrench":
                s.inject_wrench(cmd["value"])
            elif kind == "set_param":
                s.set_param(cmd["key"], cmd["value"])
            elif kind == "pause":
                s.paused = True
                s._publish(None)
            elif kind == "resume":
                s.paused = False
            elif kind == "reset":
                s.reset()
            elif kind == "select_controller":
                s.select_controller(cmd["value"])
            else:
                raise ValueError(f"unknown command {kind!r}")
        except (KeyError, ValueError, TypeError) as err:
            log.warning("rejected command %r: %s", cmd, err)

    def _run(self) -> None:
        dt = self.session.base.params.dt
        anchor_wall = time.monotonic()
        anchor_k = self.session.k
        while not self._stop.is_set():
            self._drain()
            if self.session.paused:
                time.sleep(0.01)
                anchor_wall = time.monotonic()
                anchor_k = self.session.k
                continue
            try:
                self.session.step()
            except SimulationDivergedError:
                log.exception("simulation diverged, resetting")
                self.session.reset()
                anchor_wall = time.monotonic()
                anchor_k = self.session.k
                continue
            if self.session.k < anchor_k:  # reset happened via command
                anchor_wall = time.monotonic()
                anchor_k = self.session.k
            target = anchor_wall + (self.session.k - anchor_k) * dt
            lag = target - time.monotonic()
            if lag > 0:
                time.sleep(lag)
            elif lag < -1.0:
                # hopelessly behind wall clock: re-anchor instead of sprinting
                anchor_wall = time.monotonic()
                anchor_k = self.session.k


def build_app(bridge: Bridge):
    """FastAPI application speaking the snapshot/command protocol."""
    app = FastAPI(title="ific bridge")

    @app.get("/")
    def status():
        return {"status": "ok", "snapshot": bridge.session.snapshot()}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        import asyncio

        await ws.accept()

        async def sender():
            period = 1.0 / SNAPSHOT_HZ
            while True:
                snap = bridge.session.snapshot()
                if snap is not None:
                    await ws.send_text(json.dumps(snap))
                await asyncio.sleep(period)

        async def receiver():
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict) or "type" not in msg:
                        raise ValueError("message must be an object with a 'type'")
                    if msg["type"] == "wrench":
                        clamp_wrench(msg.get("value"))  # validate before queueing
                    bridge.submit(msg)
                except (ValueError, TypeError) as err:
                    await ws.send_text(json.dumps({"type": "error", "message": str(err)}))

        send_task = asyncio.create_task(sender())
        try:
            await receiver()
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            bridge.submit({"type": "wrench", "value": [0.0] * 6})

    return app


def serve(run_config, port: int = 8750, host: str = "127.0.0.1") -> None:
    """Blocking entry point: physics thread plus uvicorn server."""
    import uvicorn

    session = LiveSession(
        run_config.scenario, run_config.controller,
        lpf=run_config.lpf, ds=run_config.ds,
    )
    bridge = Bridge(session)
    bridge.start()
    log.info("bridge listening on ws://%s:%d/ws", host, port)
    try:
        uvicorn.run(build_app(bridge), host=host, port=port, log_level="warning")
    finally:
        bridge.stop()

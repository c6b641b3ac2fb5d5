/**
 * DOM wiring for the cockpit page.
 *
 * Connects to the bridge, paints the latest snapshot at display rate, and
 * turns pointer drags and control widgets into protocol commands. All state
 * shown here comes from the server; nothing is simulated locally.
 */

import { CockpitClient } from "./client.js";
import { CONTROLLERS } from "./protocol.js";
import {
  Sparkline,
  Viewport,
  dampingGaugeFraction,
  drawScene,
  tankBars,
} from "./render.js";
import { DragMode, pointerToWrench, releaseWrench } from "./wrench.js";

const NEWTONS_PER_PIXEL = 0.4;
const VALVE_PARAMS = ["p_valve_f", "p_valve_i"] as const;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function startCockpit(): void {
  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const vp: Viewport = {
    width: canvas.width,
    height: canvas.height,
    span: 1.0,
    centerX: 0.35,
    centerZ: 0.1,
  };

  const url = `ws://${location.hostname || "localhost"}:8750/ws`;
  const client = new CockpitClient({
    url,
    socketFactory: (u) => new WebSocket(u),
  });
  client.connect();

  const pcSpark = new Sparkline(300);
  const puSpark = new Sparkline(300);
  client.onUpdate = (msg) => {
    if (msg.type === "error") {
      el("status").textContent = `server: ${msg.message}`;
      return;
    }
    if (msg.powers) {
      pcSpark.push(msg.powers.Pc);
      puSpark.push(msg.powers.Pu);
    }
  };

  // -- pointer drag -> wrench -----------------------------------------------

  let dragOrigin: { x: number; y: number } | null = null;
  const modeSelect = el<HTMLSelectElement>("drag-mode");
  canvas.addEventListener("pointerdown", (ev) => {
    dragOrigin = { x: ev.offsetX, y: ev.offsetY };
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (!dragOrigin) return;
    const mode = modeSelect.value as DragMode;
    client.sendWrench(
      pointerToWrench(
        { dx: ev.offsetX - dragOrigin.x, dy: ev.offsetY - dragOrigin.y },
        mode,
        NEWTONS_PER_PIXEL
      )
    );
  });
  const endDrag = () => {
    if (!dragOrigin) return;
    dragOrigin = null;
    client.sendWrench(releaseWrench());
  };
  canvas.addEventListener("pointerup", endDrag);
  canvas.addEventListener("pointercancel", endDrag);

  // -- transport and parameters ---------------------------------------------

  el("pause").addEventListener("click", () => client.send({ type: "pause" }));
  el("resume").addEventListener("click", () => client.send({ type: "resume" }));
  el("reset").addEventListener("click", () => client.send({ type: "reset" }));

  const controllerSelect = el<HTMLSelectElement>("controller");
  for (const name of CONTROLLERS) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    controllerSelect.appendChild(opt);
  }
  controllerSelect.addEventListener("change", () =>
    client.send({ type: "select_controller", value: controllerSelect.value })
  );

  for (const key of VALVE_PARAMS) {
    const slider = el<HTMLInputElement>(key);
    slider.addEventListener("change", () =>
      client.send({ type: "set_param", key, value: Number(slider.value) })
    );
  }

  // -- paint loop -------------------------------------------------------------

  const paint = () => {
    const snap = client.latest;
    if (snap) {
      drawScene(ctx, snap, vp);
      if (snap.tanks && snap.budgets) {
        for (const bar of tankBars(snap.tanks, snap.budgets)) {
          el(`bar-${bar.label}`).style.width = `${bar.fraction * 100}%`;
        }
      }
      if (snap.damping) {
        const labels = ["d_ft", "d_fi", "d_it", "d_ii"];
        snap.damping.forEach((d, i) => {
          el(`gauge-${labels[i]}`).style.width =
            `${dampingGaugeFraction(d) * 100}%`;
        });
      }
      el("lambda").textContent =
        snap.lambda_c === 0 ? "constrained (0)" : "free (1)";
      el("clock").textContent = `${snap.t.toFixed(2)} s  ${snap.controller}` +
        (snap.paused ? "  [paused]" : "");
    }
    drawSparkline(el<HTMLCanvasElement>("spark-pc"), pcSpark);
    drawSparkline(el<HTMLCanvasElement>("spark-pu"), puSpark);
    const banner = el("banner");
    if (client.state !== "open") {
      banner.textContent = "disconnected, retrying";
      banner.hidden = false;
    } else if (client.degraded()) {
      banner.textContent =
        `degraded link: ${client.snapshotRate()} snapshots/s`;
      banner.hidden = false;
    } else {
      banner.hidden = true;
    }
    requestAnimationFrame(paint);
  };
  requestAnimationFrame(paint);
}

function drawSparkline(canvas: HTMLCanvasElement, spark: Sparkline): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pts = spark.path(canvas.width, canvas.height);
  if (pts.length < 2) return;
  ctx.strokeStyle = "#2b6cb0";
  ctx.beginPath();
  ctx.moveTo(pts[0].x, pts[0].y);
  for (const p of pts.slice(1)) ctx.lineTo(p.x, p.y);
  ctx.stroke();
}

if (typeof document !== "undefined" && document.getElementById("scene")) {
  startCockpit();
}

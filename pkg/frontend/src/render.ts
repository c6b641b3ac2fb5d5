/**
 * Rendering math and canvas painters.
 *
 * The pure pieces (world-to-screen mapping, bar and gauge fractions,
 * sparkline paths) are separated from the canvas calls so they can be
 * unit-tested without a DOM.
 */

import { StateSnapshot, TankEnergies } from "./protocol.js";

export interface Viewport {
  width: number;
  height: number;
  /** World metres shown across the canvas width. */
  span: number;
  /** World point mapped to the canvas centre, in the x-z plane. */
  centerX: number;
  centerZ: number;
}

/** Map a world (x, z) point to canvas pixels (y axis down). */
export function worldToScreen(
  x: number,
  z: number,
  vp: Viewport
): { px: number; py: number } {
  const scale = vp.width / vp.span;
  return {
    px: vp.width / 2 + (x - vp.centerX) * scale,
    py: vp.height / 2 - (z - vp.centerZ) * scale,
  };
}

/** Fill fraction of an energy bar, clamped to [0, 1]. */
export function barFraction(energy: number, budget: number): number {
  if (!(budget > 0)) return 0;
  return Math.min(1, Math.max(0, energy / budget));
}

export interface BarLevel {
  label: string;
  fraction: number;
}

/** Four chamber bars in a fixed order, each against its own budget. */
export function tankBars(
  tanks: TankEnergies,
  budgets: TankEnergies
): BarLevel[] {
  return [
    { label: "Ef", fraction: barFraction(tanks.Ef, budgets.Ef) },
    { label: "EIf", fraction: barFraction(tanks.EIf, budgets.EIf) },
    { label: "Ei", fraction: barFraction(tanks.Ei, budgets.Ei) },
    { label: "EIi", fraction: barFraction(tanks.EIi, budgets.EIi) },
  ];
}

/**
 * Gauge position for a damping factor on a log scale from 1 to 1e4,
 * clamped to [0, 1]. Transparent gating sits at 0, a starved chamber at 1.
 */
export function dampingGaugeFraction(d: number): number {
  if (!(d > 1)) return 0;
  return Math.min(1, Math.log10(d) / 4);
}

/** Rolling sample buffer for the power sparklines. */
export class Sparkline {
  private samples: number[] = [];

  constructor(readonly capacity: number) {
    if (!(capacity > 1)) throw new Error("capacity must exceed 1");
  }

  push(v: number): void {
    this.samples.push(Number.isFinite(v) ? v : 0);
    if (this.samples.length > this.capacity) this.samples.shift();
  }

  values(): number[] {
    return [...this.samples];
  }

  /**
   * Polyline points scaled into a width x height box. The vertical range is
   * symmetric about zero so sign flips stay visible.
   */
  path(width: number, height: number): { x: number; y: number }[] {
    const n = this.samples.length;
    if (n === 0) return [];
    let amp = 0;
    for (const v of this.samples) amp = Math.max(amp, Math.abs(v));
    if (amp === 0) amp = 1;
    const dx = n > 1 ? width / (n - 1) : 0;
    return this.samples.map((v, i) => ({
      x: i * dx,
      y: height / 2 - (v / amp) * (height / 2),
    }));
  }
}

/** Scale a force vector to an arrow length in pixels, saturating at 50 N. */
export function forceArrowScale(forceNorm: number, maxPixels: number): number {
  const saturated = Math.min(Math.abs(forceNorm), 50);
  return (saturated / 50) * maxPixels;
}

const ARROW_COLORS: Record<string, string> = {
  Fext: "#d9534f",
  Fpf: "#5bc0de",
  Fimp: "#5cb85c",
};

/** Paint one snapshot onto a 2d canvas context. */
export function drawScene(
  ctx: CanvasRenderingContext2D,
  snap: StateSnapshot,
  vp: Viewport
): void {
  ctx.clearRect(0, 0, vp.width, vp.height);

  // surface line
  const s = worldToScreen(vp.centerX, snap.surface, vp);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(0, s.py);
  ctx.lineTo(vp.width, s.py);
  ctx.stroke();

  // setpoint ghost
  if (snap.setpoint) {
    const g = worldToScreen(snap.setpoint[0], snap.setpoint[2], vp);
    ctx.strokeStyle = "#bbb";
    ctx.beginPath();
    ctx.arc(g.px, g.py, 6, 0, 2 * Math.PI);
    ctx.stroke();
  }

  // end effector
  const p = worldToScreen(snap.pose[0], snap.pose[2], vp);
  ctx.fillStyle = snap.paused ? "#999" : "#2b6cb0";
  ctx.beginPath();
  ctx.arc(p.px, p.py, 8, 0, 2 * Math.PI);
  ctx.fill();

  // force arrows from the end effector
  if (snap.forces) {
    for (const [name, vec] of Object.entries(snap.forces)) {
      const norm = Math.hypot(vec[0], vec[2]);
      if (norm < 1e-9) continue;
      const len = forceArrowScale(norm, 60);
      ctx.strokeStyle = ARROW_COLORS[name] ?? "#000";
      ctx.beginPath();
      ctx.moveTo(p.px, p.py);
      ctx.lineTo(p.px + (vec[0] / norm) * len, p.py - (vec[2] / norm) * len);
      ctx.stroke();
    }
  }
}

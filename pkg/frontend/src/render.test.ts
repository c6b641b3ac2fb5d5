import { describe, expect, it } from "vitest";

import {
  Sparkline,
  Viewport,
  barFraction,
  dampingGaugeFraction,
  forceArrowScale,
  tankBars,
  worldToScreen,
} from "./render.js";

const vp: Viewport = { width: 400, height: 300, span: 1.0, centerX: 0.35, centerZ: 0.1 };

describe("worldToScreen", () => {
  it("maps the viewport centre to the canvas centre", () => {
    const p = worldToScreen(0.35, 0.1, vp);
    expect(p.px).toBeCloseTo(200);
    expect(p.py).toBeCloseTo(150);
  });

  it("flips z so higher points draw nearer the top", () => {
    const up = worldToScreen(0.35, 0.2, vp);
    expect(up.py).toBeLessThan(150);
    expect(up.py).toBeCloseTo(150 - 0.1 * 400);
  });
});

describe("barFraction and tankBars", () => {
  it("clamps to [0, 1] and divides by the budget", () => {
    expect(barFraction(0.05, 0.1)).toBeCloseTo(0.5);
    expect(barFraction(2.0, 1.0)).toBe(1);
    expect(barFraction(-0.1, 1.0)).toBe(0);
    expect(barFraction(0.5, 0)).toBe(0);
  });

  it("orders the four chambers Ef, EIf, Ei, EIi", () => {
    const bars = tankBars(
      { Ef: 0.5, EIf: 0.1, Ei: 1.0, EIi: 0.0 },
      { Ef: 1.0, EIf: 0.1, Ei: 1.0, EIi: 0.1 }
    );
    expect(bars.map((b) => b.label)).toEqual(["Ef", "EIf", "Ei", "EIi"]);
    expect(bars.map((b) => b.fraction)).toEqual([0.5, 1, 1, 0]);
  });
});

describe("dampingGaugeFraction", () => {
  it("is 0 at transparent gating and 1 at 1e4", () => {
    expect(dampingGaugeFraction(1)).toBe(0);
    expect(dampingGaugeFraction(100)).toBeCloseTo(0.5);
    expect(dampingGaugeFraction(1e4)).toBe(1);
    expect(dampingGaugeFraction(1e5)).toBe(1);
    expect(dampingGaugeFraction(0.5)).toBe(0);
  });
});

describe("Sparkline", () => {
  it("keeps only the newest capacity samples", () => {
    const s = new Sparkline(3);
    for (const v of [1, 2, 3, 4]) s.push(v);
    expect(s.values()).toEqual([2, 3, 4]);
  });

  it("scales the path symmetrically about zero", () => {
    const s = new Sparkline(10);
    s.push(-2);
    s.push(0);
    s.push(2);
    const pts = s.path(100, 40);
    expect(pts).toHaveLength(3);
    expect(pts[0]).toEqual({ x: 0, y: 40 });
    expect(pts[1]).toEqual({ x: 50, y: 20 });
    expect(pts[2]).toEqual({ x: 100, y: 0 });
  });

  it("replaces non-finite samples with zero", () => {
    const s = new Sparkline(5);
    s.push(NaN);
    expect(s.values()).toEqual([0]);
  });

  it("rejects degenerate capacity", () => {
    expect(() => new Sparkline(1)).toThrow();
  });
});

describe("forceArrowScale", () => {
  it("is linear to 50 N then saturates", () => {
    expect(forceArrowScale(25, 60)).toBeCloseTo(30);
    expect(forceArrowScale(50, 60)).toBeCloseTo(60);
    expect(forceArrowScale(500, 60)).toBeCloseTo(60);
    expect(forceArrowScale(-25, 60)).toBeCloseTo(30);
  });
});

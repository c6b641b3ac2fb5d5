import { describe, expect, it } from "vitest";

import {
  FORCE_LIMIT,
  TORQUE_LIMIT,
  clampWrench,
  pointerToWrench,
  releaseWrench,
} from "./wrench.js";

describe("clampWrench", () => {
  it("passes in-range values through unchanged", () => {
    const w = [10, -20, 30, 1, -2, 4.5];
    expect(clampWrench(w)).toEqual(w);
  });

  it("saturates forces at 50 N and torques at 5 N m", () => {
    const w = clampWrench([80, -120, 49.9, 9, -9, 5.1]);
    expect(w).toEqual([FORCE_LIMIT, -FORCE_LIMIT, 49.9, TORQUE_LIMIT, -TORQUE_LIMIT, TORQUE_LIMIT]);
  });

  it("zeroes non-finite components", () => {
    expect(clampWrench([NaN, Infinity, -Infinity, 0, 0, 0])).toEqual([
      0, FORCE_LIMIT, -FORCE_LIMIT, 0, 0, 0,
    ]);
    expect(clampWrench([NaN, 0, 0, NaN, 0, 0])[3]).toBe(0);
  });

  it("rejects wrong length", () => {
    expect(() => clampWrench([1, 2, 3])).toThrow();
  });
});

describe("pointerToWrench", () => {
  it("maps horizontal drag to x force in both modes", () => {
    for (const mode of ["planar-xy", "vertical-z"] as const) {
      const w = pointerToWrench({ dx: 10, dy: 0 }, mode, 0.5);
      expect(w[0]).toBeCloseTo(5);
      expect(w.slice(3)).toEqual([0, 0, 0]);
    }
  });

  it("maps upward drag (dy negative) to +y or +z per mode", () => {
    const planar = pointerToWrench({ dx: 0, dy: -20 }, "planar-xy", 0.5);
    expect(planar[1]).toBeCloseTo(10);
    expect(planar[2]).toBe(0);
    const vertical = pointerToWrench({ dx: 0, dy: -20 }, "vertical-z", 0.5);
    expect(vertical[2]).toBeCloseTo(10);
    expect(vertical[1]).toBe(0);
  });

  it("clamps large drags to the force limit", () => {
    const w = pointerToWrench({ dx: 1000, dy: 1000 }, "vertical-z", 1.0);
    expect(w[0]).toBe(FORCE_LIMIT);
    expect(w[2]).toBe(-FORCE_LIMIT);
  });

  it("rejects non-positive scale", () => {
    expect(() => pointerToWrench({ dx: 1, dy: 1 }, "planar-xy", 0)).toThrow();
  });
});

describe("releaseWrench", () => {
  it("is all zeros", () => {
    expect(releaseWrench()).toEqual([0, 0, 0, 0, 0, 0]);
  });
});

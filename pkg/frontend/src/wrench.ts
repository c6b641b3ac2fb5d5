/**
 * Pointer-drag to wrench mapping.
 *
 * A drag on the canvas becomes a 6d wrench command. The cockpit clamps on
 * its side to the same limits the server enforces, so the user sees the
 * saturated value that will actually be applied.
 */

export const FORCE_LIMIT = 50.0;
export const TORQUE_LIMIT = 5.0;

export type DragMode = "planar-xy" | "vertical-z";

export interface Drag {
  dx: number;
  dy: number;
}

function clamp(v: number, limit: number): number {
  return Math.min(limit, Math.max(-limit, v));
}

/** Clamp each force component to +-50 N and each torque to +-5 N m. */
export function clampWrench(w: number[]): number[] {
  if (w.length !== 6) throw new Error("wrench must have 6 components");
  return w.map((v, i) =>
    clamp(Number.isNaN(v) ? 0.0 : v, i < 3 ? FORCE_LIMIT : TORQUE_LIMIT)
  );
}

/**
 * Map a pointer drag (pixels, canvas convention with y down) to a wrench.
 *
 * planar-xy pushes in the horizontal plane, vertical-z maps vertical drag
 * to the surface normal. scale is newtons per pixel.
 */
export function pointerToWrench(
  drag: Drag,
  mode: DragMode,
  scale: number
): number[] {
  if (!(scale > 0)) throw new Error("scale must be positive");
  const w = [0, 0, 0, 0, 0, 0];
  if (mode === "planar-xy") {
    w[0] = drag.dx * scale;
    w[1] = -drag.dy * scale;
  } else {
    w[0] = drag.dx * scale;
    w[2] = -drag.dy * scale;
  }
  return clampWrench(w);
}

/** The wrench sent on pointer release. */
export function releaseWrench(): number[] {
  return [0, 0, 0, 0, 0, 0];
}

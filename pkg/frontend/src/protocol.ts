/**
 * Wire protocol of the simulation bridge.
 *
 * The server publishes ~30 Hz state snapshots and accepts wrench, parameter
 * and transport commands. Everything rendered by the cockpit is an echo of a
 * server snapshot; the client performs no physics of its own.
 */

export interface TankEnergies {
  Ef: number;
  EIf: number;
  Ei: number;
  EIi: number;
}

export interface StateSnapshot {
  type: "state";
  t: number;
  controller: string;
  paused: boolean;
  pose: number[];
  twist: number[];
  surface: number;
  tanks?: TankEnergies;
  budgets?: TankEnergies;
  damping?: number[];
  powers?: { Pc: number; Pu: number };
  forces?: { Fext: number[]; Fpf: number[]; Fimp: number[] };
  lambda_c?: number;
  setpoint?: number[];
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = StateSnapshot | ErrorMessage;

export type ClientCommand =
  | { type: "wrench"; value: number[] }
  | { type: "set_param"; key: string; value: number }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "reset" }
  | { type: "select_controller"; value: string };

const CONTROLLERS = ["ific", "ufic", "lpf", "ds"];

function isNumberArray(v: unknown, length?: number): v is number[] {
  return (
    Array.isArray(v) &&
    (length === undefined || v.length === length) &&
    v.every((x) => typeof x === "number" && Number.isFinite(x))
  );
}

/** Parse one incoming frame; returns null for anything malformed. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;
  if (msg.type === "error") {
    return typeof msg.message === "string"
      ? { type: "error", message: msg.message }
      : null;
  }
  if (msg.type !== "state") return null;
  if (typeof msg.t !== "number" || !Number.isFinite(msg.t)) return null;
  if (typeof msg.controller !== "string") return null;
  if (!isNumberArray(msg.pose, 6) || !isNumberArray(msg.twist, 6)) return null;
  return msg as unknown as StateSnapshot;
}

export function isKnownController(name: string): boolean {
  return CONTROLLERS.includes(name);
}

export { CONTROLLERS };

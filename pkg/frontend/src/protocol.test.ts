import { describe, expect, it } from "vitest";

import { isKnownController, parseServerMessage } from "./protocol.js";

const goodSnapshot = {
  type: "state",
  t: 1.25,
  controller: "ific",
  paused: false,
  pose: [0.35, 0, 0.1, 0, 0, 0],
  twist: [0, 0, 0, 0, 0, 0],
  surface: 0.0,
};

describe("parseServerMessage", () => {
  it("accepts a minimal state snapshot", () => {
    const msg = parseServerMessage(JSON.stringify(goodSnapshot));
    expect(msg).not.toBeNull();
    expect(msg!.type).toBe("state");
    if (msg!.type === "state") expect(msg!.t).toBeCloseTo(1.25);
  });

  it("keeps optional telemetry fields", () => {
    const full = {
      ...goodSnapshot,
      tanks: { Ef: 1, EIf: 0.1, Ei: 1, EIi: 0.1 },
      damping: [1, 1, 1, 1],
      powers: { Pc: 0.2, Pu: -0.1 },
      lambda_c: 0,
    };
    const msg = parseServerMessage(JSON.stringify(full));
    expect(msg).not.toBeNull();
    if (msg!.type === "state") {
      expect(msg!.tanks!.EIf).toBeCloseTo(0.1);
      expect(msg!.lambda_c).toBe(0);
    }
  });

  it("accepts error frames", () => {
    const msg = parseServerMessage(
      JSON.stringify({ type: "error", message: "bad wrench" })
    );
    expect(msg).toEqual({ type: "error", message: "bad wrench" });
  });

  it("rejects malformed frames", () => {
    const bad = [
      "not json",
      "42",
      "null",
      JSON.stringify({ type: "telemetry" }),
      JSON.stringify({ ...goodSnapshot, t: "soon" }),
      JSON.stringify({ ...goodSnapshot, pose: [1, 2, 3] }),
      JSON.stringify({ ...goodSnapshot, twist: [0, 0, 0, 0, 0, "x"] }),
      JSON.stringify({ type: "error", message: 7 }),
    ];
    for (const raw of bad) expect(parseServerMessage(raw)).toBeNull();
  });

  it("rejects non-finite numbers smuggled as null", () => {
    expect(
      parseServerMessage(
        JSON.stringify({ ...goodSnapshot, pose: [null, 0, 0, 0, 0, 0] })
      )
    ).toBeNull();
  });
});

describe("isKnownController", () => {
  it("knows the four shipped controllers", () => {
    for (const name of ["ific", "ufic", "lpf", "ds"]) {
      expect(isKnownController(name)).toBe(true);
    }
    expect(isKnownController("pid")).toBe(false);
  });
});

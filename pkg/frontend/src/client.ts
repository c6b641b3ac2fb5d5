/**
 * WebSocket client for the simulation bridge.
 *
 * Keeps only the latest snapshot (the renderer paints at its own cadence),
 * reconnects with backoff, and tracks the incoming snapshot rate so the UI
 * can flag a degraded link.
 */

import {
  ClientCommand,
  ServerMessage,
  StateSnapshot,
  parseServerMessage,
} from "./protocol.js";

/** Minimal socket surface so tests can substitute a fake. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientOptions {
  url: string;
  socketFactory: SocketFactory;
  /** Snapshot rate below this is reported as degraded. */
  minRateHz?: number;
  reconnectDelayMs?: number;
  now?: () => number;
  setTimeoutFn?: (fn: () => void, ms: number) => void;
}

export type ConnectionState = "connecting" | "open" | "closed";

export class CockpitClient {
  latest: StateSnapshot | null = null;
  lastError: string | null = null;
  state: ConnectionState = "closed";
  onUpdate: ((msg: ServerMessage) => void) | null = null;

  private socket: SocketLike | null = null;
  private readonly opts: Required<ClientOptions>;
  private arrivals: number[] = [];
  private stopped = false;

  constructor(options: ClientOptions) {
    this.opts = {
      minRateHz: 25,
      reconnectDelayMs: 1000,
      now: () => Date.now(),
      setTimeoutFn: (fn, ms) => setTimeout(fn, ms),
      ...options,
    };
  }

  connect(): void {
    this.stopped = false;
    this.state = "connecting";
    const sock = this.opts.socketFactory(this.opts.url);
    this.socket = sock;
    sock.onopen = () => {
      this.state = "open";
    };
    sock.onclose = () => {
      this.state = "closed";
      this.socket = null;
      if (!this.stopped) {
        this.opts.setTimeoutFn(() => this.connect(), this.opts.reconnectDelayMs);
      }
    };
    sock.onmessage = (ev) => this.handleFrame(ev.data);
  }

  disconnect(): void {
    this.stopped = true;
    if (this.socket) this.socket.close();
    this.socket = null;
    this.state = "closed";
  }

  handleFrame(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) return;
    if (msg.type === "error") {
      this.lastError = msg.message;
    } else {
      this.latest = msg;
      this.noteArrival(this.opts.now());
    }
    if (this.onUpdate) this.onUpdate(msg);
  }

  send(cmd: ClientCommand): boolean {
    if (this.state !== "open" || this.socket === null) return false;
    this.socket.send(JSON.stringify(cmd));
    return true;
  }

  sendWrench(value: number[]): boolean {
    return this.send({ type: "wrench", value });
  }

  private noteArrival(t: number): void {
    this.arrivals.push(t);
    const cutoff = t - 1000;
    while (this.arrivals.length > 0 && this.arrivals[0] < cutoff) {
      this.arrivals.shift();
    }
  }

  /** Snapshots per second over the trailing one-second window. */
  snapshotRate(nowMs?: number): number {
    const t = nowMs ?? this.opts.now();
    const cutoff = t - 1000;
    return this.arrivals.filter((a) => a >= cutoff).length;
  }

  /** True when connected but the stream has fallen below the floor rate. */
  degraded(nowMs?: number): boolean {
    return this.state === "open" && this.snapshotRate(nowMs) < this.opts.minRateHz;
  }
}

/** Service client: control actions with acknowledgments, the ordered
 * snapshot stream, and staleness tracking.
 *
 * The stream and HTTP layers are injected so tests (and the offline
 * replay mode) run without a browser or a live service.
 */

import { ControlAck, GeometryPayload, SnapshotRecord } from "./types.js";

export interface StreamHandle {
  close(): void;
}

export type StreamOpener = (
  url: string,
  onRecord: (line: string) => void,
  onError: () => void,
) => StreamHandle;

export type HttpPost = (url: string, body: unknown) => Promise<ControlAck>;
export type HttpGet = (url: string) => Promise<unknown>;

export interface ClientState {
  connected: boolean;
  lastIteration: number | null;
  lastRecord: SnapshotRecord | null;
  stale: boolean;
  paused: boolean;
  method: string | null;
  pendingAction: string | null;
  lastAck: ControlAck | null;
  energySeries: number[];
  tensionSeries: number[];
}

export class ServiceClient {
  state: ClientState = {
    connected: false,
    lastIteration: null,
    lastRecord: null,
    stale: false,
    paused: false,
    method: null,
    pendingAction: null,
    lastAck: null,
    energySeries: [],
    tensionSeries: [],
  };
  listeners: Array<(s: ClientState) => void> = [];
  private handle: StreamHandle | null = null;
  private staleTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    readonly base: string,
    private post: HttpPost,
    private get: HttpGet,
    private openStream: StreamOpener,
    private stalenessMs = 4000,
  ) {}

  onChange(fn: (s: ClientState) => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  async geometry(): Promise<GeometryPayload> {
    return (await this.get(`${this.base}/geometry`)) as GeometryPayload;
  }

  connect(): void {
    this.handle?.close();
    this.handle = this.openStream(
      `${this.base}/stream`,
      (line) => this.ingest(line),
      () => {
        this.state.connected = false;
        this.emit();
      },
    );
    this.state.connected = true;
    this.emit();
  }

  disconnect(): void {
    this.handle?.close();
    this.handle = null;
    this.state.connected = false;
    this.emit();
  }

  /** Feed one snapshot line (stream push or file replay). Snapshot
   * iterations must strictly increase while a run is live; stale or
   * out-of-order lines keep the last frame and raise the stale badge. */
  ingest(line: string): SnapshotRecord | null {
    let rec: SnapshotRecord;
    try {
      rec = JSON.parse(line) as SnapshotRecord;
    } catch {
      return null;
    }
    const last = this.state.lastIteration;
    if (last !== null && rec.iteration <= last && rec.iteration !== 0) {
      this.state.stale = true;
      this.emit();
      return null;
    }
    if (rec.iteration === 0) {
      this.state.energySeries = [];
      this.state.tensionSeries = [];
    }
    this.state.lastIteration = rec.iteration;
    this.state.lastRecord = rec;
    this.state.method = rec.method;
    this.state.stale = false;
    this.state.energySeries.push(rec.energy);
    this.state.tensionSeries.push(rec.tension_norm);
    if (this.staleTimer) clearTimeout(this.staleTimer);
    if (this.stalenessMs > 0 && !this.state.paused) {
      this.staleTimer = setTimeout(() => {
        this.state.stale = true;
        this.emit();
      }, this.stalenessMs);
    }
    this.emit();
    return rec;
  }

  /** Send a control action; the acknowledgment lands in state.lastAck
   * and resolves the pending marker (pause/resume also flip the local
   * paused flag so the stale timer behaves). */
  async control(payload: Record<string, unknown>): Promise<ControlAck> {
    this.state.pendingAction = String(payload.action ?? "");
    this.emit();
    let ack: ControlAck;
    try {
      ack = await this.post(`${this.base}/control`, payload);
    } catch (err) {
      ack = { ok: false, error: String(err) };
    }
    this.state.lastAck = ack;
    this.state.pendingAction = null;
    if (ack.ok) {
      if (payload.action === "pause") this.state.paused = true;
      if (payload.action === "resume") this.state.paused = false;
      if (payload.action === "reset") {
        this.state.lastIteration = null;
        this.state.lastRecord = null;
        this.state.energySeries = [];
        this.state.tensionSeries = [];
      }
    }
    this.emit();
    return ack;
  }

  start(config: Record<string, unknown>): Promise<ControlAck> {
    return this.control({ action: "start", config });
  }
  pause(): Promise<ControlAck> {
    return this.control({ action: "pause" });
  }
  resume(): Promise<ControlAck> {
    return this.control({ action: "resume" });
  }
  reset(): Promise<ControlAck> {
    return this.control({ action: "reset" });
  }
  setMethod(method: string): Promise<ControlAck> {
    return this.control({ action: "set_method", method });
  }
  setStepsize(stepsize: number): Promise<ControlAck> {
    return this.control({ action: "set_stepsize", stepsize });
  }
}

/** Parse a recorded snapshot file into its record lines (header dropped). */
export function parseSnapshotFile(text: string): string[] {
  const lines = text.split("\n").filter((ln) => ln.trim().length > 0);
  if (lines.length === 0) return [];
  try {
    const head = JSON.parse(lines[0]) as { schema?: string };
    if (head.schema && String(head.schema).startsWith("flow-snapshot/")) {
      return lines.slice(1);
    }
  } catch {
    // no header: treat every line as a record
  }
  return lines;
}

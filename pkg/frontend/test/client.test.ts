import { describe, expect, it } from "vitest";

import { ServiceClient, parseSnapshotFile } from "../src/client.js";
import { renderFrame, DEFAULT_OPTIONS } from "../src/scene.js";
import { ControlAck, GeometryPayload } from "../src/types.js";

function record(iteration: number, method = "fixed"): string {
  return JSON.stringify({
    iteration,
    energy: 20 - iteration * 0.1,
    tension_norm: Math.pow(10, -iteration),
    stepsize: 0.001,
    method,
    images: [
      [0.0, 0.0],
      [0.1, 0.1],
    ],
  });
}

function makeClient(acks: ControlAck[] = [{ ok: true }]) {
  const posted: unknown[] = [];
  let i = 0;
  const client = new ServiceClient(
    "http://svc",
    async (_url, body) => {
      posted.push(body);
      return acks[Math.min(i++, acks.length - 1)];
    },
    async () => ({ ready: false }) as GeometryPayload,
    () => ({ close: () => undefined }),
    0, // no staleness timer in tests
  );
  return { client, posted };
}

describe("stream ingestion", () => {
  it("keeps records ordered and tracks the live method badge", () => {
    const { client } = makeClient();
    client.ingest(record(0));
    client.ingest(record(1));
    client.ingest(record(2, "cosh-com"));
    expect(client.state.lastIteration).toBe(2);
    expect(client.state.method).toBe("cosh-com");
    expect(client.state.energySeries).toHaveLength(3);
  });

  it("flags stale (out-of-order) records and keeps the last frame", () => {
    const { client } = makeClient();
    client.ingest(record(0));
    client.ingest(record(5));
    const before = client.state.lastRecord;
    const out = client.ingest(record(3));
    expect(out).toBeNull();
    expect(client.state.stale).toBe(true);
    expect(client.state.lastRecord).toBe(before);
  });

  it("iteration 0 restarts the series (reset semantics)", () => {
    const { client } = makeClient();
    client.ingest(record(0));
    client.ingest(record(1));
    client.ingest(record(0));
    expect(client.state.energySeries).toHaveLength(1);
    expect(client.state.lastIteration).toBe(0);
  });

  it("ignores malformed lines", () => {
    const { client } = makeClient();
    expect(client.ingest("not json")).toBeNull();
    expect(client.state.lastRecord).toBeNull();
  });
});

describe("control acknowledgments", () => {
  it("acks resolve immediately and clear the pending marker", async () => {
    const { client, posted } = makeClient([{ ok: true, action: "pause" }]);
    const ack = await client.pause();
    expect(ack.ok).toBe(true);
    expect(client.state.paused).toBe(true);
    expect(client.state.pendingAction).toBeNull();
    expect(posted[0]).toEqual({ action: "pause" });
  });

  it("pause then resume continues from the same iteration", async () => {
    const { client } = makeClient([{ ok: true }]);
    client.ingest(record(0));
    client.ingest(record(7));
    await client.pause();
    const frozen = client.state.lastIteration;
    await client.resume();
    expect(client.state.lastIteration).toBe(frozen);
    client.ingest(record(8));
    expect(client.state.lastIteration).toBe(8);
  });

  it("rejected controls surface the service's error text", async () => {
    const { client } = makeClient([{ ok: false, error: "method must be one of ..." }]);
    const ack = await client.setMethod("warp");
    expect(ack.ok).toBe(false);
    expect(client.state.lastAck?.error).toMatch(/method must be/);
    expect(client.state.paused).toBe(false);
  });

  it("reset clears the view back to an empty state", async () => {
    const { client } = makeClient([{ ok: true }]);
    client.ingest(record(0));
    client.ingest(record(3));
    await client.reset();
    expect(client.state.lastRecord).toBeNull();
    expect(client.state.energySeries).toHaveLength(0);
  });

  it("method switches are applied on the next snapshot", async () => {
    const { client } = makeClient([{ ok: true, action: "set_method", method: "cosh-com" }]);
    client.ingest(record(0));
    const ack = await client.setMethod("cosh-com");
    expect(ack.ok).toBe(true);
    // the badge follows the stream, not the ack: one snapshot later
    expect(client.state.method).toBe("fixed");
    client.ingest(record(1, "cosh-com"));
    expect(client.state.method).toBe("cosh-com");
  });
});

describe("replay", () => {
  const GEO: GeometryPayload = {
    ready: true,
    vertices: [
      [0, 0],
      [0.1, 0.1],
    ],
    triangles: [{ orbits: [0, 1, 1], disk: [[0, 0], [0.1, 0.1], [0.2, 0.0]] }],
    domain_polygon: [[0.3, 0], [0, 0.3], [-0.3, 0]],
    target_polygon: [[0.3, 0], [0, 0.3], [-0.3, 0]],
    axes: { domain: [], target: [] },
    initial_images: [],
  };

  it("drops the header line and keeps the records", () => {
    const file = [
      JSON.stringify({ schema: "flow-snapshot/1", vertices: 2, config: {} }),
      record(0),
      record(1),
    ].join("\n");
    expect(parseSnapshotFile(file)).toHaveLength(2);
  });

  it("replaying a recorded stream renders frame-identical output", () => {
    const lines = [record(0), record(1), record(2)];
    // live: frames straight from the pushed records
    const live = lines.map((ln) =>
      JSON.stringify(renderFrame(GEO, JSON.parse(ln), DEFAULT_OPTIONS)),
    );
    // replay: through the client's ingestion of a recorded file
    const file = [JSON.stringify({ schema: "flow-snapshot/1" }), ...lines].join("\n");
    const { client } = makeClient();
    const replayed: string[] = [];
    for (const ln of parseSnapshotFile(file)) {
      const rec = client.ingest(ln);
      expect(rec).not.toBeNull();
      replayed.push(JSON.stringify(renderFrame(GEO, rec!, DEFAULT_OPTIONS)));
    }
    expect(replayed).toEqual(live);
  });
});

import { describe, expect, it } from "vitest";

import { DEFAULT_OPTIONS, renderFrame, sparkline } from "../src/scene.js";
import { GeometryPayload, SnapshotRecord } from "../src/types.js";

const GEOMETRY: GeometryPayload = {
  ready: true,
  genus: 2,
  depth: 0,
  vertices: [
    [0.0, 0.0],
    [0.2, 0.0],
    [0.0, 0.25],
  ],
  triangles: [
    {
      orbits: [0, 1, 2],
      disk: [
        [0.0, 0.0],
        [0.2, 0.0],
        [0.0, 0.25],
      ],
    },
  ],
  domain_polygon: [
    [0.5, 0.0],
    [0.0, 0.5],
    [-0.5, 0.0],
    [0.0, -0.5],
  ],
  target_polygon: [
    [0.4, 0.0],
    [0.0, 0.4],
    [-0.4, 0.0],
    [0.0, -0.4],
  ],
  axes: {
    domain: [{ label: "a1", endpoints: [[1, 0], [-1, 0]] }],
    target: [{ label: "a1", endpoints: [[0, 1], [0, -1]] }],
  },
  initial_images: [
    [0.0, 0.0],
    [0.1, 0.1],
    [-0.1, 0.2],
  ],
};

const SNAPSHOT: SnapshotRecord = {
  iteration: 4,
  energy: 21.5,
  tension_norm: 0.125,
  stepsize: 0.001,
  method: "fixed",
  images: [
    [0.0, 0.0],
    [0.12, 0.08],
    [-0.05, 0.22],
  ],
};

describe("frame construction", () => {
  it("is pure: identical inputs give identical display lists", () => {
    const f1 = renderFrame(GEOMETRY, SNAPSHOT, DEFAULT_OPTIONS);
    const f2 = renderFrame(GEOMETRY, SNAPSHOT, DEFAULT_OPTIONS);
    expect(JSON.stringify(f1)).toBe(JSON.stringify(f2));
  });

  it("draws both disks: mesh edges on domain and target", () => {
    const frame = renderFrame(GEOMETRY, SNAPSHOT);
    const edges = frame.primitives.filter((p) => p.kind === "edge" && p.role === "mesh");
    const sides = new Set(edges.map((e) => e.side));
    expect(sides).toEqual(new Set(["domain", "target"]));
    expect(edges).toHaveLength(6); // one triangle per side
  });

  it("brightens the fundamental domains when enabled", () => {
    const on = renderFrame(GEOMETRY, SNAPSHOT, { ...DEFAULT_OPTIONS, showFundamentalDomain: true });
    const off = renderFrame(GEOMETRY, SNAPSHOT, { ...DEFAULT_OPTIONS, showFundamentalDomain: false });
    const regions = (f: typeof on) =>
      f.primitives.filter((p) => p.kind === "region" && p.role === "fundamental");
    expect(regions(on)).toHaveLength(2);
    expect(regions(off)).toHaveLength(0);
  });

  it("hover highlight marks the matched triangle on both disks", () => {
    const frame = renderFrame(GEOMETRY, SNAPSHOT, {
      ...DEFAULT_OPTIONS,
      highlightTriangle: 0,
    });
    const matched = frame.primitives.filter((p) => p.kind === "region" && p.role === "matched");
    expect(matched.map((m) => m.side).sort()).toEqual(["domain", "target"]);
    const target = matched.find((m) => m.side === "target")!;
    // the matched image triangle uses the snapshot's image coordinates
    expect(target.kind === "region" && target.corners).toEqual(SNAPSHOT.images);
  });

  it("carries the scalar diagnostics", () => {
    const frame = renderFrame(GEOMETRY, SNAPSHOT);
    expect(frame.iteration).toBe(4);
    expect(frame.energy).toBe(21.5);
    expect(frame.method).toBe("fixed");
  });

  it("renders nothing before geometry is ready", () => {
    const frame = renderFrame({ ready: false }, SNAPSHOT);
    expect(frame.primitives).toHaveLength(0);
  });
});

describe("sparkline", () => {
  it("maps a decaying series monotonically upward on screen", () => {
    const pts = sparkline([1, 0.1, 0.01, 0.001], 100, 40);
    expect(pts).toHaveLength(4);
    expect(pts[0][1]).toBeLessThan(pts[3][1]); // log-decay: first point on top
    expect(pts[0][0]).toBe(0);
    expect(pts[3][0]).toBe(100);
  });

  it("handles empty and constant series", () => {
    expect(sparkline([], 100, 40)).toEqual([]);
    const flat = sparkline([2, 2, 2], 100, 40);
    expect(new Set(flat.map((p) => p[1])).size).toBe(1);
  });
});

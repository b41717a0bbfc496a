/** Snapshot + options -> display list.
 *
 * Rendering is a pure function of the snapshot record and the static
 * geometry payload, so replaying a recorded file yields exactly the
 * frames of the live run.  The canvas layer consumes the display list
 * without further computation.
 */

import { GeodesicSegment, geodesicSegment } from "./geometry.js";
import { GeometryPayload, SnapshotRecord } from "./types.js";

export interface RenderOptions {
  showMesh: boolean;
  showFundamentalDomain: boolean;
  showAxes: boolean;
  highlightTriangle: number | null; // index into geometry.triangles
  shadeContraction: boolean; // optional overlay: darker = more contracted
}

export const DEFAULT_OPTIONS: RenderOptions = {
  showMesh: true,
  showFundamentalDomain: true,
  showAxes: true,
  highlightTriangle: null,
  shadeContraction: false,
};

export interface EdgePrimitive {
  kind: "edge";
  side: "domain" | "target";
  segment: GeodesicSegment;
  role: "mesh" | "polygon" | "axis" | "highlight";
}

export interface DotPrimitive {
  kind: "dot";
  side: "domain" | "target";
  at: [number, number];
  role: "vertex" | "image";
}

export interface RegionPrimitive {
  kind: "region";
  side: "domain" | "target";
  corners: [number, number][];
  role: "fundamental" | "matched" | "shade";
  intensity?: number; // 0..1 for "shade"
}

export type Primitive = EdgePrimitive | DotPrimitive | RegionPrimitive;

export interface Frame {
  iteration: number;
  energy: number;
  tensionNorm: number;
  method: string;
  primitives: Primitive[];
}

function asPair(p: number[] | [number, number]): [number, number] {
  return [p[0], p[1]];
}

/** Build the frame for one snapshot (pure). */
export function renderFrame(
  geometry: GeometryPayload,
  snapshot: SnapshotRecord,
  options: RenderOptions = DEFAULT_OPTIONS,
): Frame {
  const prims: Primitive[] = [];
  if (!geometry.ready || !geometry.triangles) {
    return {
      iteration: snapshot.iteration,
      energy: snapshot.energy,
      tensionNorm: snapshot.tension_norm,
      method: snapshot.method,
      primitives: prims,
    };
  }
  const images = snapshot.images.map(asPair);

  if (options.showFundamentalDomain && geometry.domain_polygon) {
    prims.push({
      kind: "region",
      side: "domain",
      corners: geometry.domain_polygon.map(asPair),
      role: "fundamental",
    });
    if (geometry.target_polygon) {
      prims.push({
        kind: "region",
        side: "target",
        corners: geometry.target_polygon.map(asPair),
        role: "fundamental",
      });
    }
  }

  for (const [t, tri] of geometry.triangles.entries()) {
    const cornersDom = tri.disk.map((p) => asPair(p));
    const cornersImg = tri.orbits.map((o) => images[o]);
    const highlight = options.highlightTriangle === t;
    if (options.shadeContraction) {
      // crude per-triangle contraction: image/domain disk-area ratio,
      // darker where the map contracts (no fidelity claim; an overlay)
      const ratio = euclideanArea(cornersImg) / Math.max(euclideanArea(cornersDom), 1e-12);
      const intensity = Math.max(0, Math.min(1, 1 - ratio));
      prims.push({
        kind: "region",
        side: "target",
        corners: cornersImg,
        role: "shade",
        intensity,
      });
    }
    if (highlight) {
      prims.push({ kind: "region", side: "domain", corners: cornersDom, role: "matched" });
      prims.push({ kind: "region", side: "target", corners: cornersImg, role: "matched" });
    }
    if (!options.showMesh && !highlight) continue;
    for (let c = 0; c < 3; c++) {
      const role = highlight ? "highlight" : "mesh";
      prims.push({
        kind: "edge",
        side: "domain",
        segment: geodesicSegment(cornersDom[c], cornersDom[(c + 1) % 3]),
        role,
      });
      prims.push({
        kind: "edge",
        side: "target",
        segment: geodesicSegment(cornersImg[c], cornersImg[(c + 1) % 3]),
        role,
      });
    }
  }

  if (options.showAxes && geometry.axes) {
    for (const side of ["domain", "target"] as const) {
      for (const axis of geometry.axes[side]) {
        const [p, q] = axis.endpoints.map((e) => asPair(e));
        // pull the ideal endpoints slightly inside the disk so the arc
        // solver stays finite
        const shrink = (z: [number, number]): [number, number] => [z[0] * 0.999, z[1] * 0.999];
        prims.push({
          kind: "edge",
          side,
          segment: geodesicSegment(shrink(p), shrink(q)),
          role: "axis",
        });
      }
    }
  }

  for (const img of images) {
    prims.push({ kind: "dot", side: "target", at: img, role: "image" });
  }
  if (geometry.vertices) {
    for (const v of geometry.vertices) {
      prims.push({ kind: "dot", side: "domain", at: asPair(v), role: "vertex" });
    }
  }

  return {
    iteration: snapshot.iteration,
    energy: snapshot.energy,
    tensionNorm: snapshot.tension_norm,
    method: snapshot.method,
    primitives: prims,
  };
}

/** Sparkline polyline of a positive series in a w x h box (log scale). */
export function sparkline(
  series: number[],
  width: number,
  height: number,
): [number, number][] {
  if (series.length === 0) return [];
  const logs = series.map((v) => Math.log10(Math.max(v, 1e-300)));
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);
  const span = hi - lo || 1;
  return logs.map((v, i) => [
    series.length > 1 ? (i / (series.length - 1)) * width : 0,
    height - ((v - lo) / span) * height,
  ]);
}

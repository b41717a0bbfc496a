/** Poincare-disk drawing primitives.
 *
 * Geodesics are circular arcs meeting the unit circle at right angles;
 * a geodesic through the origin degenerates to a straight chord.  All
 * computation happens in unit-disk coordinates; the canvas layer scales
 * to pixels at the end.
 */

export interface Chord {
  kind: "chord";
  from: [number, number];
  to: [number, number];
}

export interface Arc {
  kind: "arc";
  center: [number, number];
  radius: number;
  startAngle: number;
  endAngle: number;
  anticlockwise: boolean;
  from: [number, number];
  to: [number, number];
}

export type GeodesicSegment = Chord | Arc;

const CHORD_EPS = 1e-9;

/** Geodesic segment between two points of the open unit disk. */
export function geodesicSegment(
  a: [number, number],
  b: [number, number],
): GeodesicSegment {
  const [x1, y1] = a;
  const [x2, y2] = b;
  // The full geodesic circle satisfies |z - c|^2 = |c|^2 - 1 (orthogonal
  // to the unit circle), i.e. 2 x c_x + 2 y c_y = 1 + |z|^2 at both
  // endpoints.  Degenerate determinant = the points are collinear with
  // the origin: draw the chord.
  const det = 4 * (x1 * y2 - x2 * y1);
  if (Math.abs(det) < CHORD_EPS) {
    return { kind: "chord", from: a, to: b };
  }
  const r1 = 1 + x1 * x1 + y1 * y1;
  const r2 = 1 + x2 * x2 + y2 * y2;
  const cx = (r1 * 2 * y2 - r2 * 2 * y1) / det;
  const cy = (2 * x1 * r2 - 2 * x2 * r1) / det;
  const radius = Math.sqrt(Math.max(cx * cx + cy * cy - 1, 0));
  const a0 = Math.atan2(y1 - cy, x1 - cx);
  const a1 = Math.atan2(y2 - cy, x2 - cx);
  // sweep the short way around
  let delta = a1 - a0;
  while (delta > Math.PI) delta -= 2 * Math.PI;
  while (delta < -Math.PI) delta += 2 * Math.PI;
  return {
    kind: "arc",
    center: [cx, cy],
    radius,
    startAngle: a0,
    endAngle: a0 + delta,
    anticlockwise: delta < 0,
    from: a,
    to: b,
  };
}

/** |center|^2 - radius^2 must equal 1 for circles orthogonal to the
 * boundary; returns the deviation (0 for chords through the origin). */
export function orthogonalityDefect(seg: GeodesicSegment): number {
  if (seg.kind === "chord") {
    return 0;
  }
  const [cx, cy] = seg.center;
  return Math.abs(cx * cx + cy * cy - seg.radius * seg.radius - 1);
}

/** Worst-case boundary-crossing error of the rendered primitive in
 * pixels, for a disk drawn with the given pixel radius. */
export function orthogonalityErrorPx(seg: GeodesicSegment, diskRadiusPx: number): number {
  // |c|^2 - r^2 = 1 shifts the intersection with the unit circle by
  // about half the defect in disk units
  return 0.5 * orthogonalityDefect(seg) * diskRadiusPx;
}

/** Disk coordinates -> canvas pixels. */
export function toPixels(
  p: [number, number],
  width: number,
  height: number,
  margin = 8,
): [number, number] {
  const r = Math.min(width, height) / 2 - margin;
  return [width / 2 + p[0] * r, height / 2 - p[1] * r];
}

export function pointInTriangle(
  p: [number, number],
  tri: [number, number][],
): boolean {
  // Euclidean sign test on the disk coordinates: fine for hover hits
  const [a, b, c] = tri;
  const s = (u: [number, number], v: [number, number]) =>
    (v[0] - u[0]) * (p[1] - u[1]) - (v[1] - u[1]) * (p[0] - u[0]);
  const d1 = s(a, b);
  const d2 = s(b, c);
  const d3 = s(c, a);
  const neg = d1 < 0 || d2 < 0 || d3 < 0;
  const pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

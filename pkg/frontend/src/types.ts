/** Shared shapes of the service protocol (see the repo README). */

export interface SnapshotRecord {
  iteration: number;
  energy: number;
  tension_norm: number;
  stepsize: number;
  method: string;
  images: [number, number][];
}

export interface TrianglePayload {
  orbits: number[];
  disk: number[][];
}

export interface AxisPayload {
  label: string;
  endpoints: number[][];
}

export interface GeometryPayload {
  ready: boolean;
  genus?: number;
  depth?: number;
  vertices?: number[][];
  triangles?: TrianglePayload[];
  domain_polygon?: number[][];
  target_polygon?: number[][];
  axes?: { domain: AxisPayload[]; target: AxisPayload[] };
  initial_images?: number[][];
}

export const METHODS = ["fixed", "optimal", "karcher-com", "cosh-com"] as const;
export type Method = (typeof METHODS)[number];

export interface RunConfigDraft {
  genus: number;
  domain_lengths: number[];
  domain_twists: number[];
  target_lengths: number[];
  target_twists: number[];
  depth: number;
  steiner_per_side: number;
  method: Method;
  stepsize: number | null;
  tolerance: number;
  max_iterations: number;
  snapshot_stride: number;
}

export interface ControlAck {
  ok: boolean;
  action?: string;
  error?: string;
  [key: string]: unknown;
}

/** Fenchel-Nielsen selector: pure form state, validation, serialization.
 *
 * Mirrors the service-side RunConfig invariants so bad drafts never
 * leave the client: 3g-3 length and twist fields per side, lengths
 * strictly positive, methods limited to the protocol's set.
 */

import { METHODS, Method, RunConfigDraft } from "./types.js";

export interface FieldError {
  field: string;
  message: string;
}

export function curveCount(genus: number): number {
  return 3 * genus - 3;
}

export function defaultDraft(genus = 2): RunConfigDraft {
  const n = curveCount(genus);
  return {
    genus,
    domain_lengths: Array(n).fill(2.0),
    domain_twists: Array(n).fill(0.0),
    target_lengths: Array(n).fill(2.0),
    target_twists: Array(n).fill(0.0),
    depth: 2,
    steiner_per_side: 2,
    method: "karcher-com",
    stepsize: null,
    tolerance: 1e-8,
    max_iterations: 500000,
    snapshot_stride: 50,
  };
}

/** Resize the coordinate arrays when the genus field changes. */
export function withGenus(draft: RunConfigDraft, genus: number): RunConfigDraft {
  const n = curveCount(genus);
  const fit = (xs: number[], fill: number) => {
    const out = xs.slice(0, n);
    while (out.length < n) out.push(fill);
    return out;
  };
  return {
    ...draft,
    genus,
    domain_lengths: fit(draft.domain_lengths, 2.0),
    domain_twists: fit(draft.domain_twists, 0.0),
    target_lengths: fit(draft.target_lengths, 2.0),
    target_twists: fit(draft.target_twists, 0.0),
  };
}

export function validateDraft(draft: RunConfigDraft): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isInteger(draft.genus) || draft.genus < 2) {
    errors.push({ field: "genus", message: "genus must be an integer >= 2" });
    return errors;
  }
  const n = curveCount(draft.genus);
  const lists: [string, number[]][] = [
    ["domain_lengths", draft.domain_lengths],
    ["domain_twists", draft.domain_twists],
    ["target_lengths", draft.target_lengths],
    ["target_twists", draft.target_twists],
  ];
  for (const [field, xs] of lists) {
    if (xs.length !== n) {
      errors.push({ field, message: `needs ${n} entries for genus ${draft.genus}` });
      continue;
    }
    xs.forEach((x, i) => {
      if (!Number.isFinite(x)) {
        errors.push({ field: `${field}[${i}]`, message: "not a number" });
      } else if (field.endsWith("lengths") && x <= 0) {
        errors.push({ field: `${field}[${i}]`, message: "length must be positive" });
      }
    });
  }
  if (!METHODS.includes(draft.method as Method)) {
    errors.push({ field: "method", message: `method must be one of ${METHODS.join(", ")}` });
  }
  if (draft.stepsize !== null && !(draft.stepsize > 0)) {
    errors.push({ field: "stepsize", message: "stepsize must be positive when set" });
  }
  if (!(draft.tolerance > 0)) {
    errors.push({ field: "tolerance", message: "tolerance must be positive" });
  }
  if (draft.depth < 0 || draft.steiner_per_side < 0) {
    errors.push({ field: "depth", message: "depth and steiner count must be >= 0" });
  }
  if (draft.max_iterations < 1 || draft.snapshot_stride < 1) {
    errors.push({ field: "max_iterations", message: "iteration fields must be >= 1" });
  }
  return errors;
}

/** Body of the start action; numbers pass through verbatim. */
export function toStartPayload(draft: RunConfigDraft): Record<string, unknown> {
  const errors = validateDraft(draft);
  if (errors.length > 0) {
    throw new Error(`invalid draft: ${errors.map((e) => e.field).join(", ")}`);
  }
  const config: Record<string, unknown> = {
    genus: draft.genus,
    domain_lengths: draft.domain_lengths,
    domain_twists: draft.domain_twists,
    target_lengths: draft.target_lengths,
    target_twists: draft.target_twists,
    depth: draft.depth,
    steiner_per_side: draft.steiner_per_side,
    method: draft.method,
    tolerance: draft.tolerance,
    max_iterations: draft.max_iterations,
    snapshot_stride: draft.snapshot_stride,
  };
  if (draft.stepsize !== null) {
    config.stepsize = draft.stepsize;
  }
  return { action: "start", config };
}

/** Parse a user-edited field ("2", "0.5", "-1.5") into the draft. */
export function parseField(text: string): number | null {
  const trimmed = text.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
}

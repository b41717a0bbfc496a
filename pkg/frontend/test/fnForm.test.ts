import { describe, expect, it } from "vitest";

import {
  curveCount,
  defaultDraft,
  parseField,
  toStartPayload,
  validateDraft,
  withGenus,
} from "../src/fnForm.js";

describe("fenchel-nielsen selector", () => {
  it("genus 2 exposes exactly 3 length and 3 twist fields per side", () => {
    const draft = defaultDraft(2);
    expect(curveCount(2)).toBe(3);
    expect(draft.domain_lengths).toHaveLength(3);
    expect(draft.domain_twists).toHaveLength(3);
    expect(draft.target_lengths).toHaveLength(3);
    expect(draft.target_twists).toHaveLength(3);
  });

  it("changing genus resizes to 3g-3 fields", () => {
    const draft = withGenus(defaultDraft(2), 3);
    expect(draft.domain_lengths).toHaveLength(6);
    expect(validateDraft(draft)).toHaveLength(0);
  });

  it("round-trips the reference configuration verbatim", () => {
    const draft = defaultDraft(2);
    draft.domain_lengths = [2, 2, 0.5];
    draft.domain_twists = [-1.5, 2, 0.5];
    draft.target_lengths = [2, 2, 1.5];
    draft.target_twists = [-1.5, 2, 0.5];
    const payload = toStartPayload(draft) as { action: string; config: Record<string, unknown> };
    expect(payload.action).toBe("start");
    expect(payload.config.domain_lengths).toEqual([2, 2, 0.5]);
    expect(payload.config.domain_twists).toEqual([-1.5, 2, 0.5]);
    expect(payload.config.target_lengths).toEqual([2, 2, 1.5]);
    expect(payload.config.target_twists).toEqual([-1.5, 2, 0.5]);
    // what goes out is what the service echoes into the snapshot header:
    // exact JSON round trip, no reformatting
    expect(JSON.parse(JSON.stringify(payload.config))).toEqual(payload.config);
  });

  it("blocks nonpositive lengths", () => {
    const draft = defaultDraft(2);
    draft.domain_lengths = [2, 0, 0.5];
    const errors = validateDraft(draft);
    expect(errors.some((e) => e.field === "domain_lengths[1]")).toBe(true);
    expect(() => toStartPayload(draft)).toThrow(/invalid draft/);
  });

  it("blocks bad genus, method, stepsize, and dimensions", () => {
    const bad1 = { ...defaultDraft(2), genus: 1 };
    expect(validateDraft(bad1)[0].field).toBe("genus");
    const bad2 = { ...defaultDraft(2), method: "warp" as never };
    expect(validateDraft(bad2).some((e) => e.field === "method")).toBe(true);
    const bad3 = { ...defaultDraft(2), stepsize: -1 };
    expect(validateDraft(bad3).some((e) => e.field === "stepsize")).toBe(true);
    const bad4 = defaultDraft(2);
    bad4.target_twists = [0];
    expect(validateDraft(bad4).some((e) => e.field === "target_twists")).toBe(true);
  });

  it("parses user text fields including negatives", () => {
    expect(parseField(" -1.5 ")).toBe(-1.5);
    expect(parseField("2")).toBe(2);
    expect(parseField("abc")).toBeNull();
    expect(parseField("")).toBeNull();
  });
});

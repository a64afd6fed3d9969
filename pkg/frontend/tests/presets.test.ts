import { describe, expect, it } from "vitest";

import { PRESETS, presetById } from "../src/presets.js";

describe("query presets", () => {
  it("covers the three usage types", () => {
    expect(PRESETS.map((p) => p.id)).toEqual(["reader", "investigation", "clarification"]);
  });

  it("every preset is a SELECT over the wb: vocabulary", () => {
    for (const preset of PRESETS) {
      expect(preset.query).toMatch(/^SELECT /);
      expect(preset.query).toContain("wb:onto/");
      expect(preset.query).toContain("WHERE {");
    }
  });

  it("lookup by id", () => {
    expect(presetById("reader")?.entailment).toBe(true);
    expect(presetById("nope")).toBeUndefined();
  });
});

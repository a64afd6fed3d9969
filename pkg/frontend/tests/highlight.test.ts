import { describe, expect, it } from "vitest";

import { renderHighlighted, segmentText, violationLabel } from "../src/highlight.js";
import type { Violation } from "../src/types.js";

const v = (start: number, end: number, kind = "DatatypeViolation"): Violation => ({
  kind,
  subject: "<x>",
  detail: "detail",
  span: { start, end },
});

describe("segmentText", () => {
  it("segments around one span", () => {
    const segments = segmentText("abcdef", [{ start: 2, end: 4 }]);
    expect(segments.map((s) => s.text)).toEqual(["ab", "cd", "ef"]);
    expect(segments.map((s) => s.violations)).toEqual([[], [0], []]);
  });

  it("concatenates back to the input", () => {
    const text = "The église {{#ann: height=12.5}} stands.";
    const segments = segmentText(text, [{ start: 5, end: 12 }, { start: 20, end: 30 }]);
    expect(segments.map((s) => s.text).join("")).toBe(text);
  });

  it("handles overlapping spans", () => {
    const segments = segmentText("abcdef", [
      { start: 0, end: 4 },
      { start: 2, end: 6 },
    ]);
    expect(segments.map((s) => s.violations)).toEqual([[0], [0, 1], [1]]);
  });

  it("spans are byte offsets, not char offsets", () => {
    // "éx" : é = bytes 0..2, x = bytes 2..3
    const segments = segmentText("éx", [{ start: 2, end: 3 }]);
    expect(segments.map((s) => s.text)).toEqual(["é", "x"]);
    expect(segments[1].violations).toEqual([0]);
  });

  it("ignores missing spans", () => {
    const segments = segmentText("abc", [undefined]);
    expect(segments).toEqual([{ text: "abc", violations: [] }]);
  });

  it("empty text yields no segments", () => {
    expect(segmentText("", [])).toEqual([]);
  });
});

describe("renderHighlighted", () => {
  it("wraps covered segments in marks", () => {
    const html = renderHighlighted("ab<cd>ef", [v(2, 6)]);
    expect(html).toBe(
      'ab<mark class="violation" data-violations="0">&lt;cd&gt;</mark>ef',
    );
  });

  it("escapes everything", () => {
    const html = renderHighlighted('<script>"&', []);
    expect(html).toBe("&lt;script&gt;&quot;&amp;");
  });
});

describe("violationLabel", () => {
  it("includes kind, rule, span, and detail", () => {
    const label = violationLabel({
      kind: "RuleViolation",
      subject: "_:a1",
      detail: "no facts",
      rule_name: "dating-needs-year",
      span: { start: 3, end: 9 },
    });
    expect(label).toBe("RuleViolation (dating-needs-year) @3..9: no facts");
  });

  it("omits absent parts", () => {
    expect(violationLabel({ kind: "K", subject: "s", detail: "d" })).toBe("K: d");
  });
});

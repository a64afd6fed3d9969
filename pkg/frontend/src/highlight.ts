import { byteToChar } from "./bytes.js";
import { escapeHtml } from "./html.js";
import type { Span, Violation } from "./types.js";

export interface Segment {
  text: string;
  /** indexes into the violation list whose spans cover this segment */
  violations: number[];
}

/**
 * Split the text at every span boundary and tag each piece with the
 * violations covering it. Spans are byte offsets; output is plain text
 * segments in document order, concatenating back to the input.
 */
export function segmentText(text: string, spans: (Span | undefined)[]): Segment[] {
  const marks = spans.map((span) =>
    span
      ? { start: byteToChar(text, span.start), end: byteToChar(text, span.end) }
      : null,
  );
  const cuts = new Set<number>([0, text.length]);
  for (const m of marks) {
    if (m && m.end > m.start) {
      cuts.add(Math.min(m.start, text.length));
      cuts.add(Math.min(m.end, text.length));
    }
  }
  const points = [...cuts].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const [from, to] = [points[i], points[i + 1]];
    if (from === to) continue;
    const covering: number[] = [];
    marks.forEach((m, idx) => {
      if (m && m.start <= from && to <= m.end) covering.push(idx);
    });
    segments.push({ text: text.slice(from, to), violations: covering });
  }
  if (segments.length === 0 && text.length === 0) return [];
  return segments;
}

/** HTML for the read-only diagnostics overlay behind the editor text. */
export function renderHighlighted(text: string, violations: Violation[]): string {
  const segments = segmentText(
    text,
    violations.map((v) => v.span),
  );
  return segments
    .map((seg) => {
      const escaped = escapeHtml(seg.text);
      if (seg.violations.length === 0) return escaped;
      const ids = seg.violations.join(" ");
      return `<mark class="violation" data-violations="${ids}">${escaped}</mark>`;
    })
    .join("");
}

/** One-line label for a violation list entry. */
export function violationLabel(v: Violation): string {
  const rule = v.rule_name ? ` (${v.rule_name})` : "";
  const where = v.span ? ` @${v.span.start}..${v.span.end}` : "";
  return `${v.kind}${rule}${where}: ${v.detail}`;
}

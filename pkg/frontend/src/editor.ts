// Editor session state machine. Pure reducer: the DOM layer dispatches
// events and re-renders from the state, which keeps the tricky parts
// (conflict handling, draft preservation, in-flight locking) testable.

import type { Report, RevisionMeta } from "./types.js";

export interface EditorState {
  namespace: string;
  title: string;
  draft: string;
  baseRevision: number; // 0 = page does not exist yet
  dirty: boolean;
  inFlight: boolean;
  report: Report | null;
  conflict: { currentRevision: number } | null;
  banner: { tone: "success" | "error" | "info"; text: string } | null;
}

export type EditorEvent =
  | { type: "loaded"; text: string; revision: number }
  | { type: "edit"; text: string }
  | { type: "check-start" }
  | { type: "check-result"; report: Report }
  | { type: "save-start" }
  | { type: "save-ok"; revision: RevisionMeta; report: Report }
  | { type: "save-conflict"; currentRevision: number }
  | { type: "save-rejected"; report: Report }
  | { type: "save-denied"; detail: string }
  | { type: "request-failed"; message: string }
  | { type: "dismiss-banner" };

export function initialEditor(namespace: string, title: string): EditorState {
  return {
    namespace,
    title,
    draft: "",
    baseRevision: 0,
    dirty: false,
    inFlight: false,
    report: null,
    conflict: null,
    banner: null,
  };
}

export function canSave(state: EditorState): boolean {
  return !state.inFlight && state.conflict === null;
}

export function canCheck(state: EditorState): boolean {
  return !state.inFlight;
}

export function editorReduce(state: EditorState, event: EditorEvent): EditorState {
  switch (event.type) {
    case "loaded":
      return {
        ...state,
        draft: event.text,
        baseRevision: event.revision,
        dirty: false,
        inFlight: false,
        report: null,
        conflict: null,
        banner: null,
      };
    case "edit":
      return { ...state, draft: event.text, dirty: true };
    case "check-start":
    case "save-start":
      return { ...state, inFlight: true, banner: null };
    case "check-result":
      return { ...state, inFlight: false, report: event.report };
    case "save-ok":
      return {
        ...state,
        inFlight: false,
        dirty: false,
        baseRevision: event.revision.number,
        report: event.report,
        conflict: null,
        banner: { tone: "success", text: `Saved revision ${event.revision.number}` },
      };
    case "save-conflict":
      // The draft stays untouched; the user resolves via reload.
      return {
        ...state,
        inFlight: false,
        conflict: { currentRevision: event.currentRevision },
        banner: {
          tone: "error",
          text:
            `Save conflict: the page is at revision ${event.currentRevision}, ` +
            `your draft is based on ${state.baseRevision}. Reload to continue; ` +
            `your draft is preserved.`,
        },
      };
    case "save-rejected":
      // Strict-mode 422: nothing was saved, the draft must survive.
      return {
        ...state,
        inFlight: false,
        report: event.report,
        banner: {
          tone: "error",
          text: `Rejected: ${event.report.violations.length} violation(s); nothing was saved`,
        },
      };
    case "save-denied":
      return {
        ...state,
        inFlight: false,
        banner: { tone: "error", text: `Not allowed: ${event.detail}` },
      };
    case "request-failed":
      return {
        ...state,
        inFlight: false,
        banner: { tone: "error", text: `Request failed: ${event.message} (draft kept)` },
      };
    case "dismiss-banner":
      return { ...state, banner: null };
  }
}

export function draftStorageKey(state: EditorState): string {
  return `wikibridge.draft.${state.namespace}.${state.title}`;
}

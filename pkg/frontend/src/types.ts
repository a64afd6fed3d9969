// Payload shapes of the wiki service API. The client renders these
// verbatim; it never derives validation or query results on its own.

export interface Span {
  start: number;
  end: number;
}

export interface Violation {
  kind: string;
  subject: string;
  detail: string;
  rule_name?: string;
  span?: Span;
}

export interface ParseDiagnostic {
  kind: string;
  message: string;
  span: Span;
}

export interface Report {
  page: string;
  revision: number;
  violations: Violation[];
  checked_at: string;
  diagnostics?: ParseDiagnostic[];
}

export interface RevisionMeta {
  number: number;
  author: string;
  timestamp: string;
  violations: number;
}

export interface PageDoc {
  namespace: string;
  title: string;
  revision: RevisionMeta;
  text: string;
  annotations: { graph: string; count: number; nquads: string };
  report: Report;
}

export interface PageListEntry {
  namespace: string;
  title: string;
  revision: number;
}

export type BindingTermType = "uri" | "literal" | "bnode";

export interface BindingTerm {
  type: BindingTermType;
  value: string;
  datatype?: string;
}

export interface ResultsDoc {
  head: { vars: string[] };
  results: { bindings: Record<string, BindingTerm>[] };
}

export interface LoginResult {
  token: string;
  user: string;
  groups: string[];
}

export interface SaveResult {
  revision: RevisionMeta;
  report: Report;
}

export interface ApiErrorBody {
  error: string;
  [key: string]: unknown;
}

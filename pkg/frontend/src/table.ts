import type { BindingTerm, ResultsDoc } from "./types.js";

const PAGE_PREFIX = "http://wikibridge.example/page/";

export interface Cell {
  text: string;
  href?: string;
  kind: BindingTermType | "unbound";
}

type BindingTermType = "uri" | "literal" | "bnode";

export interface TableModel {
  columns: string[];
  rows: Cell[][];
}

/** Hash route for wiki-page IRIs; anything else renders as plain text. */
export function pageHref(iri: string): string | undefined {
  if (!iri.startsWith(PAGE_PREFIX)) return undefined;
  const encoded = iri.slice(PAGE_PREFIX.length);
  return `#/page/Main/${encoded}`;
}

function cellFor(term: BindingTerm | undefined): Cell {
  if (!term) return { text: "", kind: "unbound" };
  if (term.type === "uri") {
    return { text: term.value, href: pageHref(term.value), kind: "uri" };
  }
  if (term.type === "bnode") {
    return { text: `_:${term.value}`, kind: "bnode" };
  }
  const suffix = term.datatype ? `^^${term.datatype.split("#").pop()}` : "";
  return { text: term.value + suffix, kind: "literal" };
}

/** Column set always equals the document's head vars, even with no rows. */
export function tableModel(doc: ResultsDoc): TableModel {
  const columns = doc.head.vars;
  const rows = doc.results.bindings.map((binding) =>
    columns.map((v) => cellFor(binding[v])),
  );
  return { columns, rows };
}

// Read-only query templates keyed by usage type. Placeholders in
// UPPER_SNAKE are meant to be edited before running.

export interface QueryPreset {
  id: string;
  label: string;
  description: string;
  query: string;
  entailment: boolean;
}

export const PRESETS: QueryPreset[] = [
  {
    id: "reader",
    label: "Reader: pages of a class",
    description: "Everything described as a given class, inference on.",
    query: "SELECT ?page WHERE { ?page rdf:type wb:onto/CLASS_NAME . }",
    entailment: true,
  },
  {
    id: "investigation",
    label: "Investigation: values above a threshold",
    description: "Pages with a property value passing a numeric filter.",
    query:
      "SELECT ?page ?value WHERE { ?page rdf:type wb:onto/CLASS_NAME . " +
      "?page wb:onto/PROPERTY ?value . FILTER(?value > 0) } ORDER BY DESC(?value)",
    entailment: false,
  },
  {
    id: "clarification",
    label: "Clarification: relation instances with roles",
    description: "Relation nodes and two of their role fillers.",
    query:
      "SELECT ?node ?a ?b WHERE { ?node rdf:type wb:onto/RELATION_NAME . " +
      "?node wb:onto/ROLE_A ?a . ?node wb:onto/ROLE_B ?b . }",
    entailment: false,
  },
];

export function presetById(id: string): QueryPreset | undefined {
  return PRESETS.find((p) => p.id === id);
}

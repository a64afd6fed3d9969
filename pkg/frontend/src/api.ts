import type {
  ApiErrorBody,
  LoginResult,
  PageDoc,
  PageListEntry,
  Report,
  ResultsDoc,
  RevisionMeta,
  SaveResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(`${status}: ${body.error ?? "error"}`);
  }
}

export class NetworkError extends Error {}

/** Thin wrapper over the service API; every result is the server's JSON. */
export class ApiClient {
  token: string | null = null;

  constructor(public base: string = "") {}

  headers(json = true): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.base + path, init);
    } catch (e) {
      throw new NetworkError(String(e));
    }
    const body = await response.json().catch(() => ({ error: "bad_response" }));
    if (!response.ok) {
      throw new ApiError(response.status, body as ApiErrorBody);
    }
    return body as T;
  }

  async login(user: string, password: string): Promise<LoginResult> {
    const result = await this.request<LoginResult>("/api/login", {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ user, password }),
    });
    this.token = result.token;
    return result;
  }

  listPages(): Promise<{ pages: PageListEntry[] }> {
    return this.request("/api/pages", { headers: this.headers(false) });
  }

  getPage(ns: string, title: string): Promise<PageDoc> {
    return this.request(this.pagePath(ns, title), { headers: this.headers(false) });
  }

  listRevisions(ns: string, title: string): Promise<{ revisions: RevisionMeta[] }> {
    return this.request(this.pagePath(ns, title) + "/revisions", {
      headers: this.headers(false),
    });
  }

  putPage(
    ns: string,
    title: string,
    text: string,
    baseRevision?: number,
    mode?: "strict" | "lenient",
  ): Promise<SaveResult> {
    const body: Record<string, unknown> = { text };
    if (baseRevision !== undefined) body.base_revision = baseRevision;
    if (mode) body.mode = mode;
    return this.request(this.pagePath(ns, title), {
      method: "PUT",
      headers: this.headers(),
      body: JSON.stringify(body),
    });
  }

  check(text: string, title?: string): Promise<Report> {
    const body: Record<string, unknown> = { text };
    if (title) body.title = title;
    return this.request("/api/check", {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify(body),
    });
  }

  sparql(query: string, entailment = false): Promise<ResultsDoc> {
    return this.request("/api/sparql", {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ query, entailment }),
    });
  }

  /** The console is ACL-gated; probe with a harmless query. */
  async canQuery(): Promise<boolean> {
    try {
      await this.sparql("SELECT ?s WHERE { ?s ?p ?o . } LIMIT 1");
      return true;
    } catch (e) {
      if (e instanceof ApiError && e.status === 403) return false;
      if (e instanceof ApiError) return true; // reachable, just unhappy
      throw e;
    }
  }

  pagePath(ns: string, title: string): string {
    return `/api/pages/${encodeURIComponent(ns)}/${encodeURIComponent(title)}`;
  }
}

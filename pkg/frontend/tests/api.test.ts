import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function stubFetch(status: number, body: unknown) {
  const mock = vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  }));
  vi.stubGlobal("fetch", mock);
  return mock;
}

afterEach(() => vi.unstubAllGlobals());

describe("ApiClient", () => {
  it("login stores the token and later requests carry it", async () => {
    const mock = stubFetch(200, { token: "tok123", user: "alice", groups: [] });
    const api = new ApiClient("");
    await api.login("alice", "pw");
    expect(api.token).toBe("tok123");

    stubFetch(200, { pages: [] });
    await api.listPages();
    const [url, init] = (fetch as ReturnType<typeof vi.fn>).mock.calls[0];
    expect(url).toBe("/api/pages");
    expect(init.headers.Authorization).toBe("Bearer tok123");
    expect(mock).toHaveBeenCalledOnce();
  });

  it("percent-encodes namespace and title in paths", () => {
    const api = new ApiClient("");
    expect(api.pagePath("Main", "St Martin")).toBe("/api/pages/Main/St%20Martin");
  });

  it("put sends base_revision and mode only when given", async () => {
    stubFetch(200, { revision: {}, report: {} });
    const api = new ApiClient("");
    await api.putPage("Main", "T", "text", 3, "strict");
    let body = JSON.parse((fetch as ReturnType<typeof vi.fn>).mock.calls[0][1].body);
    expect(body).toEqual({ text: "text", base_revision: 3, mode: "strict" });

    stubFetch(200, { revision: {}, report: {} });
    await api.putPage("Main", "T", "text");
    body = JSON.parse((fetch as ReturnType<typeof vi.fn>).mock.calls[0][1].body);
    expect(body).toEqual({ text: "text" });
  });

  it("non-2xx becomes ApiError with the body attached", async () => {
    stubFetch(409, { error: "conflict", current_revision: 7 });
    const api = new ApiClient("");
    const err = await api.putPage("Main", "T", "x", 1).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.body.current_revision).toBe(7);
  });

  it("canQuery maps 403 to false and success to true", async () => {
    stubFetch(403, { error: "forbidden" });
    const api = new ApiClient("");
    expect(await api.canQuery()).toBe(false);

    stubFetch(200, { head: { vars: [] }, results: { bindings: [] } });
    expect(await api.canQuery()).toBe(true);
  });

  it("sparql posts query and entailment flag", async () => {
    stubFetch(200, { head: { vars: [] }, results: { bindings: [] } });
    const api = new ApiClient("");
    await api.sparql("SELECT ?x WHERE { ?x ?p ?o . }", true);
    const body = JSON.parse((fetch as ReturnType<typeof vi.fn>).mock.calls[0][1].body);
    expect(body.entailment).toBe(true);
  });
});

// Single-page shell: hash routing, login, page list, editor, query console.
// All validation and query answers come from the service; this file only
// renders responses and dispatches events into the pure state modules.

import { ApiClient, ApiError, NetworkError } from "./api.js";
import {
  EditorState,
  canCheck,
  canSave,
  draftStorageKey,
  editorReduce,
  initialEditor,
} from "./editor.js";
import { renderHighlighted, violationLabel } from "./highlight.js";
import { el, escapeHtml } from "./html.js";
import { PRESETS, presetById } from "./presets.js";
import { tableModel } from "./table.js";
import type { Report, ResultsDoc } from "./types.js";

const api = new ApiClient("");
let user: string | null = null;
let queryAllowed = false;

const root = () => document.getElementById("app")!;

function nav(): string {
  const console_ = queryAllowed
    ? `<a href="#/query">Query console</a>`
    : "";
  const who = user
    ? `<span class="who">${escapeHtml(user)}</span> <a href="#/login" id="logout">Log out</a>`
    : `<a href="#/login">Log in</a>`;
  return `<nav><a href="#/pages">Pages</a> ${console_} <span class="spacer"></span> ${who}</nav>`;
}

function setView(html: string): HTMLElement {
  root().innerHTML = nav() + `<main>${html}</main>`;
  const logout = document.getElementById("logout");
  if (logout) {
    logout.addEventListener("click", () => {
      api.token = null;
      user = null;
      queryAllowed = false;
      sessionStorage.removeItem("wikibridge.token");
    });
  }
  return root().querySelector("main")!;
}

// ---------------------------------------------------------------------------
// login

function loginView(): void {
  const main = setView(`
    <h1>wikibridge</h1>
    <form id="login-form" class="card">
      <label>User <input name="user" autocomplete="username"></label>
      <label>Password <input name="password" type="password" autocomplete="current-password"></label>
      <button type="submit">Log in</button>
      <p class="error" id="login-error" hidden></p>
    </form>`);
  const form = main.querySelector<HTMLFormElement>("#login-form")!;
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const data = new FormData(form);
    const error = main.querySelector<HTMLElement>("#login-error")!;
    try {
      const result = await api.login(
        String(data.get("user") ?? ""),
        String(data.get("password") ?? ""),
      );
      user = result.user;
      sessionStorage.setItem("wikibridge.token", result.token);
      queryAllowed = await api.canQuery();
      location.hash = "#/pages";
    } catch (e) {
      error.hidden = false;
      error.textContent =
        e instanceof ApiError && e.status === 401
          ? "Wrong user or password."
          : `Login failed: ${e}`;
    }
  });
}

// ---------------------------------------------------------------------------
// page list

async function pagesView(): Promise<void> {
  const main = setView(`<h1>Pages</h1><p>Loading…</p>`);
  try {
    const { pages } = await api.listPages();
    const items = pages
      .map(
        (p) =>
          `<li><a href="#/page/${encodeURIComponent(p.namespace)}/${encodeURIComponent(p.title)}">` +
          `${escapeHtml(p.namespace)}:${escapeHtml(p.title)}</a> <small>r${p.revision}</small></li>`,
      )
      .join("");
    main.innerHTML = `
      <h1>Pages</h1>
      <ul class="pagelist">${items || "<li><em>No pages yet.</em></li>"}</ul>
      <form id="new-page" class="inline">
        <input name="title" placeholder="New page title">
        <button type="submit">Create</button>
      </form>`;
    main.querySelector<HTMLFormElement>("#new-page")!.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const title = String(new FormData(ev.target as HTMLFormElement).get("title") ?? "").trim();
      if (title) location.hash = `#/page/Main/${encodeURIComponent(title)}`;
    });
  } catch (e) {
    main.innerHTML = `<p class="error">${escapeHtml(String(e))}</p>`;
  }
}

// ---------------------------------------------------------------------------
// editor

function reportHtml(report: Report | null): string {
  if (!report) return "";
  const diags = (report.diagnostics ?? [])
    .map((d) => `<li class="diag">${escapeHtml(`${d.kind} @${d.span.start}..${d.span.end}: ${d.message}`)}</li>`)
    .join("");
  const items = report.violations
    .map((v, i) => `<li data-violation="${i}">${escapeHtml(violationLabel(v))}</li>`)
    .join("");
  if (!items && !diags) return `<p class="ok">No violations.</p>`;
  return `<ul class="violations">${diags}${items}</ul>`;
}

async function editorView(ns: string, title: string): Promise<void> {
  let state: EditorState = initialEditor(ns, title);
  const stored = localStorage.getItem(draftStorageKey(state));

  try {
    const page = await api.getPage(ns, title);
    state = editorReduce(state, {
      type: "loaded",
      text: page.text,
      revision: page.revision.number,
    });
    state = editorReduce(state, { type: "check-result", report: page.report });
  } catch (e) {
    if (!(e instanceof ApiError && e.status === 404)) {
      setView(`<p class="error">${escapeHtml(String(e))}</p>`);
      return;
    }
  }
  if (stored !== null && stored !== state.draft) {
    state = editorReduce(state, { type: "edit", text: stored });
  }

  const main = setView(`
    <h1>${escapeHtml(ns)}:${escapeHtml(title)} <small id="rev"></small></h1>
    <div id="banner" hidden></div>
    <div class="editor-wrap">
      <pre id="overlay" aria-hidden="true"></pre>
      <textarea id="draft" spellcheck="false"></textarea>
    </div>
    <div class="toolbar">
      <button id="check">Check</button>
      <button id="save">Save</button>
      <button id="reload" hidden>Reload latest</button>
      <label class="strict"><input type="checkbox" id="strict"> strict</label>
      <a href="#/pages">Back</a>
    </div>
    <section id="report"></section>`);

  const draft = main.querySelector<HTMLTextAreaElement>("#draft")!;
  const overlay = main.querySelector<HTMLPreElement>("#overlay")!;
  const banner = main.querySelector<HTMLElement>("#banner")!;
  const checkBtn = main.querySelector<HTMLButtonElement>("#check")!;
  const saveBtn = main.querySelector<HTMLButtonElement>("#save")!;
  const reloadBtn = main.querySelector<HTMLButtonElement>("#reload")!;
  const strict = main.querySelector<HTMLInputElement>("#strict")!;
  const reportBox = main.querySelector<HTMLElement>("#report")!;
  const revLabel = main.querySelector<HTMLElement>("#rev")!;

  function render(): void {
    if (draft.value !== state.draft) draft.value = state.draft;
    overlay.innerHTML = state.report
      ? renderHighlighted(state.draft, state.report.violations)
      : escapeHtml(state.draft);
    revLabel.textContent = state.baseRevision ? `r${state.baseRevision}` : "(new page)";
    banner.hidden = !state.banner;
    if (state.banner) {
      banner.className = `banner ${state.banner.tone}`;
      banner.textContent = state.banner.text;
    }
    checkBtn.disabled = !canCheck(state);
    saveBtn.disabled = !canSave(state);
    reloadBtn.hidden = state.conflict === null;
    reportBox.innerHTML = reportHtml(state.report);
    localStorage.setItem(draftStorageKey(state), state.draft);
  }

  function dispatch(event: Parameters<typeof editorReduce>[1]): void {
    state = editorReduce(state, event);
    render();
  }

  draft.addEventListener("input", () => dispatch({ type: "edit", text: draft.value }));
  draft.addEventListener("scroll", () => {
    overlay.scrollTop = draft.scrollTop;
    overlay.scrollLeft = draft.scrollLeft;
  });

  checkBtn.addEventListener("click", async () => {
    dispatch({ type: "check-start" });
    try {
      const report = await api.check(state.draft, undefined);
      dispatch({ type: "check-result", report });
    } catch (e) {
      if (e instanceof ApiError && e.status === 400 && "violations" in e.body) {
        dispatch({ type: "check-result", report: e.body as unknown as Report });
      } else if (e instanceof NetworkError) {
        dispatch({ type: "request-failed", message: e.message });
      } else {
        dispatch({ type: "request-failed", message: String(e) });
      }
    }
  });

  saveBtn.addEventListener("click", async () => {
    dispatch({ type: "save-start" });
    try {
      const result = await api.putPage(
        ns,
        title,
        state.draft,
        state.baseRevision,
        strict.checked ? "strict" : undefined,
      );
      dispatch({ type: "save-ok", revision: result.revision, report: result.report });
      localStorage.removeItem(draftStorageKey(state));
      localStorage.setItem(draftStorageKey(state), state.draft);
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        dispatch({
          type: "save-conflict",
          currentRevision: Number(e.body.current_revision ?? 0),
        });
      } else if (e instanceof ApiError && e.status === 422) {
        dispatch({
          type: "save-rejected",
          report: (e.body as unknown as { report: Report }).report,
        });
      } else if (e instanceof ApiError && e.status === 403) {
        dispatch({ type: "save-denied", detail: String(e.body.action ?? "forbidden") });
      } else if (e instanceof NetworkError) {
        dispatch({ type: "request-failed", message: e.message });
      } else {
        dispatch({ type: "request-failed", message: String(e) });
      }
    }
  });

  reloadBtn.addEventListener("click", async () => {
    const page = await api.getPage(ns, title);
    // keep the draft: the user merges by hand, the reload only rebases
    const keep = state.draft;
    dispatch({ type: "loaded", text: page.text, revision: page.revision.number });
    dispatch({ type: "edit", text: keep });
  });

  render();
}

// ---------------------------------------------------------------------------
// query console

async function queryView(): Promise<void> {
  if (!queryAllowed) {
    setView(`<h1>Query console</h1>
      <p class="error">Your account does not include the <code>query</code> action.</p>`);
    return;
  }
  const options = PRESETS.map(
    (p) => `<option value="${p.id}">${escapeHtml(p.label)}</option>`,
  ).join("");
  const main = setView(`
    <h1>Query console</h1>
    <div class="toolbar">
      <select id="preset"><option value="">— preset —</option>${options}</select>
      <label><input type="checkbox" id="entailment"> entailment</label>
      <button id="run">Run</button>
    </div>
    <textarea id="query" rows="6" spellcheck="false">SELECT ?page WHERE { ?page rdf:type wb:onto/Church . }</textarea>
    <p class="error" id="query-error" hidden></p>
    <section id="results"></section>`);

  const queryBox = main.querySelector<HTMLTextAreaElement>("#query")!;
  const entailment = main.querySelector<HTMLInputElement>("#entailment")!;
  const errorBox = main.querySelector<HTMLElement>("#query-error")!;
  const results = main.querySelector<HTMLElement>("#results")!;

  main.querySelector<HTMLSelectElement>("#preset")!.addEventListener("change", (ev) => {
    const preset = presetById((ev.target as HTMLSelectElement).value);
    if (preset) {
      queryBox.value = preset.query;
      entailment.checked = preset.entailment;
    }
  });

  main.querySelector<HTMLButtonElement>("#run")!.addEventListener("click", async () => {
    errorBox.hidden = true;
    results.innerHTML = "<p>Running…</p>";
    try {
      const doc = await api.sparql(queryBox.value, entailment.checked);
      results.innerHTML = "";
      results.appendChild(resultsTable(doc));
    } catch (e) {
      results.innerHTML = "";
      errorBox.hidden = false;
      if (e instanceof ApiError && e.status === 400) {
        const offset = e.body.offset;
        errorBox.textContent = `Syntax error at byte ${offset}: ${e.body.message}`;
      } else if (e instanceof ApiError && e.status === 403) {
        queryAllowed = false;
        void queryView();
        return;
      } else {
        errorBox.textContent = String(e);
      }
    }
  });
}

function resultsTable(doc: ResultsDoc): HTMLElement {
  const model = tableModel(doc);
  const table = el("table", { class: "results" });
  const header = el("tr");
  for (const column of model.columns) {
    header.appendChild(el("th", {}, escapeHtml("?" + column)));
  }
  table.appendChild(header);
  for (const row of model.rows) {
    const tr = el("tr");
    for (const cell of row) {
      const td = el("td", { class: cell.kind });
      if (cell.href) {
        const a = el("a", { href: cell.href }, escapeHtml(cell.text));
        td.appendChild(a);
      } else {
        td.textContent = cell.text;
      }
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  const wrap = el("div");
  wrap.appendChild(table);
  wrap.appendChild(el("p", { class: "count" }, `${model.rows.length} result(s)`));
  return wrap;
}

// ---------------------------------------------------------------------------
// router

async function route(): Promise<void> {
  const hash = location.hash || "#/pages";
  if (!api.token) {
    const saved = sessionStorage.getItem("wikibridge.token");
    if (saved) {
      api.token = saved;
      queryAllowed = await api.canQuery().catch(() => false);
    }
  }
  const parts = hash.slice(2).split("/");
  if (parts[0] === "login" || !api.token) {
    loginView();
    return;
  }
  if (parts[0] === "page" && parts.length >= 3) {
    await editorView(decodeURIComponent(parts[1]), decodeURIComponent(parts.slice(2).join("/")));
    return;
  }
  if (parts[0] === "query") {
    await queryView();
    return;
  }
  await pagesView();
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());

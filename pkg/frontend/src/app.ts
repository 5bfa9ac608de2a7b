/** Browser glue: wires the API client and the pure render functions into
 * the page. One user session per tab; every edit waits for the server
 * response before the view updates (edits are audited, so no optimistic
 * state). */

import { ApiClient, ApiHttpError } from "./api.js";
import { normalizeTagPreview } from "./normalize.js";
import {
  renderDebugView,
  renderDocList,
  renderDocPaths,
  renderError,
  renderTagEditResult,
} from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function clientFromForm(): ApiClient {
  const baseUrl = (el<HTMLInputElement>("base-url").value || "").replace(/\/$/, "");
  const apiToken = el<HTMLInputElement>("api-token").value || undefined;
  return new ApiClient({ baseUrl, apiToken });
}

function showError(target: HTMLElement, err: unknown): void {
  if (err instanceof ApiHttpError) {
    target.innerHTML = renderError(err.status, {
      code: err.code,
      message: err.message,
      detail: err.detail,
    });
  } else {
    target.innerHTML = renderError(0, {
      code: "network_error",
      message: String(err),
    });
  }
}

async function refreshDocs(): Promise<void> {
  const target = el("docs-view");
  try {
    const { documents } = await clientFromForm().listDocs();
    target.innerHTML = renderDocList(documents);
    for (const link of target.querySelectorAll<HTMLAnchorElement>(".open-doc")) {
      link.addEventListener("click", (ev) => {
        ev.preventDefault();
        void openDoc(link.dataset.docId!, 0);
      });
    }
  } catch (err) {
    showError(target, err);
  }
}

async function openDoc(docId: string, offset: number): Promise<void> {
  const target = el("doc-detail");
  const limit = 20;
  try {
    const page = await clientFromForm().docChunks(docId, offset, limit);
    target.innerHTML = renderDocPaths(page);
    target.querySelector(".pager-prev")?.addEventListener("click", () =>
      void openDoc(docId, Math.max(0, offset - limit)));
    target.querySelector(".pager-next")?.addEventListener("click", () =>
      void openDoc(docId, offset + limit));
    for (const btn of target.querySelectorAll<HTMLButtonElement>(".edit-doc, .edit-chunk")) {
      btn.addEventListener("click", () => {
        const scope = btn.classList.contains("edit-doc") ? "document" : "chunk";
        el<HTMLInputElement>("edit-target").value =
          scope === "document" ? btn.dataset.docId! : btn.dataset.chunkId!;
        el<HTMLSelectElement>("edit-scope").value = scope;
        el("tab-curate").scrollIntoView();
      });
    }
  } catch (err) {
    showError(target, err);
  }
}

async function runDebugQuery(): Promise<void> {
  const target = el("debug-view");
  const question = el<HTMLInputElement>("debug-question").value.trim();
  const k = Number(el<HTMLInputElement>("debug-k").value);
  if (!question) return;
  try {
    const resp = await clientFromForm().query(question, k, true, false);
    target.innerHTML = renderDebugView(resp.trace!);
    for (const row of target.querySelectorAll<HTMLTableRowElement>(".candidate")) {
      row.addEventListener("click", async () => {
        const chunk = await clientFromForm().chunk(row.dataset.chunkId!);
        el("chunk-inspector").innerHTML =
          `<h4>${chunk.chunk_id}</h4><p class="path">${chunk.path.display}</p>` +
          `<pre>${chunk.text.replace(/</g, "&lt;")}</pre>`;
      });
    }
  } catch (err) {
    showError(target, err);
  }
}

function updateTagPreview(): void {
  const raw = el<HTMLInputElement>("edit-tag").value;
  const preview = normalizeTagPreview(raw);
  const node = el("tag-preview");
  const submit = el<HTMLButtonElement>("edit-submit");
  if (preview === null) {
    node.textContent = raw ? "normalizes to empty — fix the tag" : "";
    submit.disabled = true;
  } else {
    node.textContent = `will be stored as: ${preview}`;
    submit.disabled = false;
  }
}

async function submitTagEdit(): Promise<void> {
  const target = el("edit-result");
  const scope = el<HTMLSelectElement>("edit-scope").value as "document" | "chunk";
  const action = el<HTMLSelectElement>("edit-action").value as "inject" | "remove";
  const targetId = el<HTMLInputElement>("edit-target").value.trim();
  const tag = el<HTMLInputElement>("edit-tag").value;
  const probe = el<HTMLInputElement>("edit-probe").value.trim() || undefined;
  if (!targetId || normalizeTagPreview(tag) === null) return;
  try {
    const resp = await clientFromForm().editTag(targetId, scope, action, tag, probe);
    target.innerHTML = renderTagEditResult(resp);
  } catch (err) {
    showError(target, err);
  }
}

export function boot(): void {
  el("docs-refresh").addEventListener("click", () => void refreshDocs());
  el("debug-run").addEventListener("click", () => void runDebugQuery());
  el<HTMLInputElement>("debug-k").addEventListener("change", () => void runDebugQuery());
  el<HTMLInputElement>("edit-tag").addEventListener("input", updateTagPreview);
  el("edit-submit").addEventListener("click", () => void submitTagEdit());
  updateTagPreview();
  void refreshDocs();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  boot();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}

// Page wiring. Every handler talks to the server, then re-renders from the
// response; nothing is shown optimistically, and the breadcrumb is rebuilt
// from the server-side history after each action.

import { ApiError, Client } from "./api.js";
import {
  absorbProposal,
  absorbResult,
  absorbSession,
  emptyView,
  type SessionView,
} from "./state.js";
import {
  clearError,
  prefillQuery,
  renderBreadcrumb,
  renderError,
  renderItem,
  renderProposal,
  renderResults,
  renderViewpoints,
} from "./render.js";

function byId<T extends HTMLElement>(root: Document, id: string): T {
  const node = root.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function init(root: Document, client: Client = new Client()): void {
  const errorBox = byId<HTMLElement>(root, "error");
  const viewpointBox = byId<HTMLElement>(root, "viewpoints");
  const resultBox = byId<HTMLElement>(root, "results");
  const breadcrumbBox = byId<HTMLElement>(root, "breadcrumb");
  const proposalBox = byId<HTMLElement>(root, "proposal");
  const itemBox = byId<HTMLElement>(root, "item-panel");
  const sessionForm = byId<HTMLFormElement>(root, "session-form");
  const actorInput = byId<HTMLInputElement>(root, "actor-input");
  const sessionLabel = byId<HTMLElement>(root, "session-label");
  const queryForm = byId<HTMLFormElement>(root, "query-form");
  const queryInput = byId<HTMLInputElement>(root, "query-input");
  const driftToggle = byId<HTMLInputElement>(root, "drift-toggle");
  const transitionForm = byId<HTMLFormElement>(root, "transition-form");
  const targetSelect = byId<HTMLSelectElement>(root, "target-select");
  const anchorInput = byId<HTMLInputElement>(root, "anchor-input");

  let view: SessionView = emptyView();

  function redraw(): void {
    renderViewpoints(viewpointBox, view.available, view.activeViewpoints);
    targetSelect.replaceChildren(
      ...view.activeViewpoints.map((vpId) => {
        const option = root.createElement("option");
        option.value = vpId;
        option.textContent = vpId;
        return option;
      }),
    );
    if (view.lastResult) {
      renderResults(resultBox, view.lastResult, view.driftMode);
    }
    if (view.proposal) {
      renderProposal(proposalBox, view.proposal);
    }
    renderBreadcrumb(breadcrumbBox, {
      session_id: view.sessionId ?? "",
      actor: view.actor ?? "",
      active_viewpoints: view.activeViewpoints,
      original_query: null,
      history: view.history,
    });
    sessionLabel.textContent = view.sessionId
      ? `session ${view.sessionId.slice(0, 8)} (${view.actor})`
      : "no session";
  }

  function fail(error: unknown): void {
    if (error instanceof ApiError) {
      renderError(errorBox, `${error.code}: ${error.detail}`);
    } else {
      renderError(errorBox, String(error));
    }
  }

  async function refreshSession(): Promise<void> {
    if (!view.sessionId) return;
    view = absorbSession(view, await client.getSession(view.sessionId));
  }

  async function loadViewpoints(): Promise<void> {
    view = { ...view, available: await client.listViewpoints() };
    redraw();
  }

  sessionForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const chosen = Array.from(
      viewpointBox.querySelectorAll<HTMLInputElement>("input[type=checkbox]:checked"),
      (box) => box.value,
    );
    client
      .openSession(actorInput.value.trim(), chosen)
      .then(async (opened) => {
        view = { ...view, sessionId: opened.session_id, lastResult: null, proposal: null };
        clearError(errorBox);
        await refreshSession();
        redraw();
      })
      .catch(fail);
  });

  queryForm.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!view.sessionId) {
      renderError(errorBox, "open a session first");
      return;
    }
    client
      .submitQuery(view.sessionId, [queryInput.value])
      .then(async (result) => {
        view = absorbResult(view, result);
        clearError(errorBox);
        proposalBox.replaceChildren();
        await refreshSession();
        redraw();
      })
      .catch(fail);
  });

  transitionForm.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!view.sessionId) {
      renderError(errorBox, "open a session first");
      return;
    }
    const anchor = anchorInput.value.trim();
    client
      .transition(view.sessionId, targetSelect.value, anchor === "" ? undefined : anchor)
      .then(async (proposal) => {
        view = absorbProposal(view, proposal);
        clearError(errorBox);
        prefillQuery(queryInput, proposal);
        await refreshSession();
        redraw();
      })
      .catch(fail);
  });

  driftToggle.addEventListener("change", () => {
    view = { ...view, driftMode: driftToggle.checked ? "weight" : "annotate" };
    redraw();
  });

  resultBox.addEventListener("click", (event) => {
    const link = (event.target as HTMLElement).closest<HTMLElement>(".item-link");
    const itemId = link?.dataset.itemId;
    if (!itemId) return;
    client
      .getItem(itemId)
      .then((item) => renderItem(itemBox, item))
      .catch(fail);
  });

  loadViewpoints().catch(fail);
}

declare global {
  interface Window {
    VLENS_API?: string;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.addEventListener("DOMContentLoaded", () => {
    init(document, new Client(window.VLENS_API ?? ""));
  });
}

// DOM construction. Every function replaces the children of the container it
// is given, renders strictly in payload order, and shows score strings
// exactly as the server value formatted to 3 decimals.

import type {
  ItemJson,
  ProvenanceChip,
  QueryResponse,
  SessionJson,
  TransitionResponse,
  ViewpointRow,
} from "./types.js";
import type { DriftMode } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderError(container: HTMLElement, message: string): void {
  container.replaceChildren(el("div", "error-banner", message));
}

export function clearError(container: HTMLElement): void {
  container.replaceChildren();
}

/** Structural check of a ranked payload; returns a description of the first
 * problem, or null when the payload is renderable. */
export function validateResults(payload: unknown): string | null {
  const p = payload as Partial<QueryResponse> | null;
  if (!p || typeof p !== "object" || !Array.isArray(p.ranked)) {
    return "response carries no ranked list";
  }
  for (const row of p.ranked) {
    if (
      typeof row?.item_id !== "string" ||
      typeof row?.fused_score !== "number" ||
      !Array.isArray(row?.provenance)
    ) {
      return "malformed result row";
    }
    for (const chip of row.provenance) {
      if (
        typeof chip?.viewpoint_id !== "string" ||
        typeof chip?.raw_score !== "number" ||
        typeof chip?.drift !== "number"
      ) {
        return `item ${row.item_id}: malformed provenance`;
      }
    }
  }
  return null;
}

function chipNode(chip: ProvenanceChip, mode: DriftMode): HTMLElement {
  const node = el("span", "chip", `${chip.viewpoint_id} ${chip.raw_score.toFixed(3)}`);
  node.dataset.viewpoint = chip.viewpoint_id;
  if (mode === "weight") {
    node.append(el("span", "drift", ` ×${chip.drift.toFixed(2)}`));
    node.style.opacity = String(0.35 + 0.65 * chip.drift);
  } else {
    node.title = `drift ${chip.drift.toFixed(2)}`;
  }
  return node;
}

export function renderResults(container: HTMLElement, payload: unknown, mode: DriftMode): void {
  const problem = validateResults(payload);
  if (problem !== null) {
    renderError(container, `bad result payload: ${problem}`);
    return;
  }
  const { ranked } = payload as QueryResponse;
  const list = el("ol", "results");
  list.dataset.driftMode = mode;
  for (const row of ranked) {
    const li = el("li", "result-row");
    li.dataset.itemId = row.item_id;
    li.append(el("span", "rank", String(row.rank)));
    const link = el("button", "item-link", row.item_id);
    link.type = "button";
    link.dataset.itemId = row.item_id;
    li.append(link);
    li.append(el("span", "fused", row.fused_score.toFixed(3)));
    const chips = el("span", "chips");
    for (const chip of row.provenance) {
      chips.append(chipNode(chip, mode));
    }
    li.append(chips);
    list.append(li);
  }
  if (ranked.length === 0) {
    container.replaceChildren(el("p", "no-results", "no results"));
    return;
  }
  container.replaceChildren(list);
}

export function strategyBadge(strategy: string): HTMLElement {
  const badge = el("span", `badge badge-${strategy}`, strategy);
  badge.dataset.strategy = strategy;
  return badge;
}

/** One crumb per server history step, in server order. */
export function renderBreadcrumb(container: HTMLElement, session: SessionJson): void {
  const trail = el("ol", "breadcrumb");
  for (const step of session.history) {
    if (step.type === "query") {
      trail.append(el("li", "crumb crumb-query", step.query.terms.join(" ")));
    } else {
      const li = el("li", "crumb crumb-transition");
      li.append(strategyBadge(step.proposal.strategy));
      li.append(el("span", "crumb-target", ` → ${step.target_vp}`));
      trail.append(li);
    }
  }
  container.replaceChildren(trail);
}

export function renderProposal(container: HTMLElement, proposal: TransitionResponse): void {
  const box = el("div", "proposal");
  box.append(strategyBadge(proposal.strategy));
  box.append(el("span", "proposal-query", ` proposed: ${proposal.query.terms.join(" ")}`));
  if (proposal.applied_rules.length > 0) {
    const rules = el("ul", "applied-rules");
    for (const rule of proposal.applied_rules) {
      rules.append(
        el(
          "li",
          "rule",
          `${rule.from} → ${rule.to.join(" ")} (${rule.confidence.toFixed(2)})`,
        ),
      );
    }
    box.append(rules);
  }
  container.replaceChildren(box);
}

/** Put the proposed query into the box for the user to edit and fire.
 * Never submits. */
export function prefillQuery(input: HTMLInputElement, proposal: TransitionResponse): void {
  input.value = proposal.query.terms.join(" ");
}

export function renderViewpoints(
  container: HTMLElement,
  rows: ViewpointRow[],
  active: string[],
): void {
  const list = el("ul", "viewpoints");
  for (const row of rows) {
    const li = el("li", active.includes(row.id) ? "viewpoint active" : "viewpoint");
    const label = el("label");
    const box = el("input");
    box.type = "checkbox";
    box.value = row.id;
    box.checked = active.includes(row.id);
    label.append(box);
    label.append(el("span", "viewpoint-id", ` ${row.id}`));
    label.append(el("span", "viewpoint-note", ` ${row.context} (${row.domain_size} items)`));
    li.append(label);
    list.append(li);
  }
  container.replaceChildren(list);
}

export function renderItem(container: HTMLElement, item: ItemJson): void {
  const panel = el("div", "item-detail");
  panel.append(el("h3", "item-name", `${item.name}`));
  panel.append(el("p", "item-kind", `${item.kind} · ${item.id}`));
  if (item.description) {
    panel.append(el("p", "item-description", item.description));
  }
  const attrs = Object.entries(item.attributes);
  if (attrs.length > 0) {
    const dl = el("dl", "item-attrs");
    for (const [name, value] of attrs) {
      dl.append(el("dt", undefined, name));
      dl.append(el("dd", undefined, value));
    }
    panel.append(dl);
  }
  if (item.relationships.length > 0) {
    const rels = el("ul", "item-rels");
    for (const rel of item.relationships) {
      rels.append(el("li", undefined, `${rel.source} ${rel.kind} ${rel.target}`));
    }
    panel.append(rels);
  }
  container.replaceChildren(panel);
}

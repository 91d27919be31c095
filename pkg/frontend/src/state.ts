import type {
  HistoryStep,
  QueryResponse,
  SessionJson,
  TransitionResponse,
  ViewpointRow,
} from "./types.js";

/** How provenance drift is shown: weighted into the chip, or as a plain
 * annotation. Exposing the factor is the user's choice. */
export type DriftMode = "weight" | "annotate";

/** Everything the page reflects. History is copied from the server response
 * untouched, so the breadcrumb can never drift from server order. */
export interface SessionView {
  sessionId: string | null;
  actor: string | null;
  available: ViewpointRow[];
  activeViewpoints: string[];
  history: HistoryStep[];
  lastResult: QueryResponse | null;
  proposal: TransitionResponse | null;
  driftMode: DriftMode;
}

export function emptyView(): SessionView {
  return {
    sessionId: null,
    actor: null,
    available: [],
    activeViewpoints: [],
    history: [],
    lastResult: null,
    proposal: null,
    driftMode: "weight",
  };
}

export function absorbSession(view: SessionView, session: SessionJson): SessionView {
  return {
    ...view,
    sessionId: session.session_id,
    actor: session.actor,
    activeViewpoints: [...session.active_viewpoints],
    history: [...session.history],
  };
}

export function absorbResult(view: SessionView, result: QueryResponse): SessionView {
  return { ...view, lastResult: result, proposal: null };
}

export function absorbProposal(view: SessionView, proposal: TransitionResponse): SessionView {
  return { ...view, proposal, activeViewpoints: [...proposal.active_viewpoints] };
}

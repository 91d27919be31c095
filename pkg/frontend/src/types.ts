// Payload shapes of the vlens HTTP API, mirrored field for field. The UI
// never computes scores; it renders what these carry.

export interface QueryEcho {
  terms: string[];
  kind?: string;
  attrs?: Record<string, string>;
}

export interface ProvenanceChip {
  viewpoint_id: string;
  raw_score: number;
  drift: number;
}

export interface RankedRow {
  rank: number;
  item_id: string;
  fused_score: number;
  provenance: ProvenanceChip[];
}

export interface QueryResponse {
  session_id: string;
  query: QueryEcho;
  selected: string[];
  ranked: RankedRow[];
}

export interface AppliedRule {
  from: string;
  to: string[];
  confidence: number;
}

export interface TranslatedQuery {
  strategy: string;
  query: QueryEcho;
  original: QueryEcho;
  applied_rules: AppliedRule[];
}

export interface TransitionResponse extends TranslatedQuery {
  session_id: string;
  active_viewpoints: string[];
}

export interface QueryStep {
  type: "query";
  at: string;
  query: QueryEcho;
  selected: string[];
  result: { ranked: RankedRow[] };
}

export interface TransitionStep {
  type: "transition";
  at: string;
  target_vp: string;
  anchor: string | null;
  proposal: TranslatedQuery;
}

export type HistoryStep = QueryStep | TransitionStep;

export interface SessionJson {
  session_id: string;
  actor: string;
  active_viewpoints: string[];
  original_query: QueryEcho | null;
  history: HistoryStep[];
}

export interface SessionOpened {
  session_id: string;
  actor: string;
  active_viewpoints: string[];
}

export interface ViewpointRow {
  id: string;
  actor: string;
  context: string;
  importance: number;
  domain_size: number;
}

export interface RelationshipJson {
  source: string;
  target: string;
  kind: string;
  weight: number;
}

export interface ItemJson {
  id: string;
  kind: string;
  name: string;
  attributes: Record<string, string>;
  description: string;
  relationships: RelationshipJson[];
}

export interface HealthJson {
  items: number;
  viewpoints: number;
}

export interface ErrorEnvelope {
  error: string;
  detail: string;
}

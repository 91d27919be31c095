import type {
  HealthJson,
  ItemJson,
  QueryResponse,
  SessionJson,
  SessionOpened,
  TransitionResponse,
  ViewpointRow,
  ErrorEnvelope,
} from "./types.js";

/** Server-reported failure, carrying the error envelope verbatim. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly detail: string,
    readonly status: number,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export class Client {
  constructor(private readonly base: string = "") {}

  private async send<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    const body = (await response.json().catch(() => null)) as unknown;
    if (!response.ok) {
      const envelope = (body ?? {}) as Partial<ErrorEnvelope>;
      throw new ApiError(
        envelope.error ?? "HttpError",
        envelope.detail ?? response.statusText,
        response.status,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.send<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<HealthJson> {
    return this.send("/health");
  }

  listViewpoints(): Promise<ViewpointRow[]> {
    return this.send("/viewpoints");
  }

  openSession(actor: string, viewpoints: string[]): Promise<SessionOpened> {
    return this.post("/sessions", { actor, viewpoints });
  }

  // terms may be raw text; the server tokenizes
  submitQuery(sessionId: string, terms: string[], k?: number): Promise<QueryResponse> {
    return this.post(`/sessions/${sessionId}/query`, { terms, k });
  }

  transition(sessionId: string, targetVp: string, anchor?: string): Promise<TransitionResponse> {
    return this.post(`/sessions/${sessionId}/transition`, { target_vp: targetVp, anchor });
  }

  getSession(sessionId: string): Promise<SessionJson> {
    return this.send(`/sessions/${sessionId}`);
  }

  getItem(itemId: string): Promise<ItemJson> {
    return this.send(`/items/${encodeURIComponent(itemId)}`);
  }
}

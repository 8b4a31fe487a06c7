/** Thin typed client over the session HTTP API. */

import type {
  ApiErrorBody,
  GraphDetail,
  Label,
  SessionCreated,
  SessionSummary,
  ThresholdResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let body: ApiErrorBody | null = null;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    // non-JSON error body; fall through to the generic message
  }
  return new ApiError(
    response.status,
    body?.error ?? "unknown",
    body?.message ?? `request failed with status ${response.status}`,
  );
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  uploadCorpus(corpusJson: string): Promise<{ corpus_id: string }> {
    return this.request("/corpora", { method: "POST", body: corpusJson });
  }

  createSession(corpusId: string, options?: { r?: number }): Promise<SessionCreated> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ corpus_id: corpusId, ...options }),
    });
  }

  getRanking(sessionId: string, topK = 50, offset = 0): Promise<SessionSummary> {
    return this.request(
      `/sessions/${sessionId}/ranking?top_k=${topK}&offset=${offset}`,
    );
  }

  submitFeedback(
    sessionId: string,
    graphId: string,
    label: Label,
    revision: number,
  ): Promise<SessionSummary> {
    return this.request(`/sessions/${sessionId}/feedback`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ graph_id: graphId, label, revision }),
    });
  }

  setThreshold(
    sessionId: string,
    threshold: number,
    revision: number,
  ): Promise<ThresholdResponse> {
    return this.request(`/sessions/${sessionId}/threshold`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ threshold, revision }),
    });
  }

  getGraph(corpusId: string, graphId: string): Promise<GraphDetail> {
    return this.request<{ graph: GraphDetail }>(
      `/corpora/${corpusId}/graphs/${encodeURIComponent(graphId)}`,
    ).then((body) => body.graph);
  }
}

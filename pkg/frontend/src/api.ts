// Thin typed client over the gateway's JSON endpoints. The fetch function
// is injectable so tests can run against recorded responses.

import type { ExtractionEventRecord, RatingRecord, RecallSummary, SnippetDoc } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export type ApiError = {
  code: string;
  message: string;
  detail?: string | null;
};

export class GatewayError extends Error {
  readonly status: number;
  readonly api: ApiError;

  constructor(status: number, api: ApiError) {
    super(`${api.code}: ${api.message}`);
    this.status = status;
    this.api = api;
  }
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let api: ApiError;
      try {
        api = (await response.json()) as ApiError;
      } catch {
        api = { code: "internal", message: `http ${response.status}` };
      }
      throw new GatewayError(response.status, api);
    }
    return (await response.json()) as T;
  }

  createSession(sessionId?: string): Promise<{ session_id: string }> {
    return this.request("POST", "/sessions", sessionId ? { session_id: sessionId } : {});
  }

  postUtterance(
    sessionId: string,
    utterance: {
      speaker: string;
      t_start_ms: number;
      t_end_ms: number;
      text: string;
      confidence?: number;
    },
  ): Promise<{ utterance_id: number; event: ExtractionEventRecord | null }> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/utterances`, utterance);
  }

  getEvents(sessionId: string, since = 0): Promise<{ events: ExtractionEventRecord[] }> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/events?since=${since}`);
  }

  putRating(
    sessionId: string,
    rating: { event_id: number; snippet_id: string; stars: number },
  ): Promise<{ rating: RatingRecord }> {
    return this.request("PUT", `/sessions/${encodeURIComponent(sessionId)}/ratings`, rating);
  }

  getRecall(sessionId: string, topN = 10): Promise<RecallSummary> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/recall?top_n=${topN}`);
  }

  getSnippet(snippetId: string): Promise<SnippetDoc> {
    return this.request("GET", `/snippets/${encodeURIComponent(snippetId)}`);
  }

  streamUrl(sessionId: string, since = 0): string {
    return `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/stream?since=${since}`;
  }
}

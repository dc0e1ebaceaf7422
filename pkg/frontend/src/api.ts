/** Thin typed client for the backend API. Non-2xx responses become
 * ApiError instances carrying the server's machine code, so callers can
 * branch on `code` instead of matching message strings. */

import type {
  ApiErrorBody,
  ArticleInfo,
  FeedbackBody,
  FeedbackReport,
  GraphStats,
  Recommendation,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly requestId: string;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.requestId = body.request_id;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body as ApiErrorBody);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  recommend(caseText: string): Promise<Recommendation> {
    return this.post("/api/recommend", { case_text: caseText });
  }

  feedback(body: FeedbackBody): Promise<FeedbackReport> {
    return this.post("/api/feedback", body);
  }

  followup(sessionId: string, question: string): Promise<{ answer: string }> {
    return this.post("/api/followup", { session_id: sessionId, question });
  }

  stats(): Promise<GraphStats> {
    return this.request("/api/graph/stats");
  }

  article(number: string): Promise<ArticleInfo> {
    return this.request(`/api/articles/${encodeURIComponent(number)}`);
  }

  keys(prefix: string): Promise<{ keys: string[] }> {
    return this.request(`/api/keys?prefix=${encodeURIComponent(prefix)}`);
  }
}

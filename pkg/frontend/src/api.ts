// Thin typed client over the service HTTP/JSON API. All dashboard numbers
// are server-computed; this layer only moves them.

import type {
  Decision,
  Dossier,
  LabelResult,
  Metrics,
  ModelInfo,
  RetrainResult,
  ReviewItem,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly token: string = "",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {
      "content-type": "application/json",
      ...(this.token ? { "x-auth-token": this.token } : {}),
    };
    const response = await fetch(this.baseUrl + path, { ...init, headers });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = typeof body.code === "string" ? body.code : "http_error";
      const message =
        typeof body.message === "string" ? body.message : `HTTP ${response.status}`;
      throw new ApiError(response.status, code, message);
    }
    return body as T;
  }

  health(): Promise<{ ok: boolean; model_version: number }> {
    return this.request("/health");
  }

  async flags(status?: string): Promise<ReviewItem[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    const body = await this.request<{ items: ReviewItem[] }>(`/flags${query}`);
    return body.items;
  }

  dossier(subreddit: string, month?: string): Promise<Dossier> {
    const query = month ? `?month=${encodeURIComponent(month)}` : "";
    return this.request(`/communities/${encodeURIComponent(subreddit)}${query}`);
  }

  submitLabel(
    subreddit: string,
    decision: Decision,
    actor: string,
    month?: string,
  ): Promise<LabelResult> {
    return this.request("/labels", {
      method: "POST",
      body: JSON.stringify({ subreddit, decision, actor, month: month ?? null }),
    });
  }

  retrain(): Promise<RetrainResult> {
    return this.request("/retrain", { method: "POST" });
  }

  cycle(month: string): Promise<{ month: string; items: ReviewItem[] }> {
    return this.request("/cycle", { method: "POST", body: JSON.stringify({ month }) });
  }

  metrics(): Promise<Metrics> {
    return this.request("/metrics");
  }

  model(): Promise<ModelInfo> {
    return this.request("/model");
  }
}

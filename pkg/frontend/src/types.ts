// Wire types mirroring the service's JSON responses.

export type ItemStatus = "pending" | "intervened" | "dismissed";

export interface ReviewItem {
  subreddit: string;
  flagged_month: string | null;
  score: number;
  top_factors: [string, number][];
  status: ItemStatus;
  decided_by: string;
  decided_at: string;
}

/** [month_from, month_to, rbo_distance] of one consecutive-month pair. */
export type SeriesPoint = [string, string, number];

export interface Dossier {
  subreddit: string;
  month: string;
  features: Record<string, number>;
  evolution: { vocabulary: SeriesPoint[]; user: SeriesPoint[] };
  score: number;
  top_factors: [string, number][];
  status: string;
}

export interface Metrics {
  tp: number;
  fn: number;
  dismissed: number;
  mean_lead_time: number;
  pending: number;
  model_version: number;
  training_queue: number;
  current_month: string;
}

export interface ModelInfo {
  version: number;
  kind: string;
  hash: string;
  importances: Record<string, number>;
  metadata: Record<string, unknown>;
}

export interface LabelResult {
  item: ReviewItem;
  outcome: "tp" | "fn" | "dismissed";
  training_delta: boolean;
}

export interface RetrainResult {
  retrained: boolean;
  version: number;
  new_rows?: number;
  reason?: string;
}

export type Decision = "intervened" | "dismissed";

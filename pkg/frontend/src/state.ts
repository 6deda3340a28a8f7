// Pure queue-state logic. The server is the source of truth: optimistic
// updates are provisional row edits that reconcile() replaces with the
// server's copy as soon as the POST round-trip returns.

import type { Decision, Metrics, ReviewItem } from "./types.js";

export type SortKey = "score" | "flagged_month" | "subreddit";

export interface QueueFilter {
  status?: string;
  month?: string;
}

export function sortItems(
  items: ReviewItem[],
  key: SortKey = "score",
  descending = true,
): ReviewItem[] {
  const sorted = [...items].sort((a, b) => {
    let cmp: number;
    if (key === "score") {
      cmp = a.score - b.score;
    } else if (key === "flagged_month") {
      cmp = (a.flagged_month ?? "").localeCompare(b.flagged_month ?? "");
    } else {
      cmp = a.subreddit.localeCompare(b.subreddit);
    }
    if (cmp === 0) {
      cmp = a.subreddit.localeCompare(b.subreddit); // stable tie-break
    }
    return descending ? -cmp : cmp;
  });
  return sorted;
}

export function filterItems(items: ReviewItem[], filter: QueueFilter): ReviewItem[] {
  return items.filter(
    (item) =>
      (!filter.status || item.status === filter.status) &&
      (!filter.month || item.flagged_month === filter.month),
  );
}

/** Provisional local decision, applied before the server answers. */
export function applyDecision(
  items: ReviewItem[],
  subreddit: string,
  decision: Decision,
  actor: string,
): ReviewItem[] {
  return items.map((item) =>
    item.subreddit === subreddit && item.status === "pending"
      ? { ...item, status: decision, decided_by: actor }
      : item,
  );
}

/** Replace the optimistic row with the server's authoritative item. */
export function reconcile(items: ReviewItem[], serverItem: ReviewItem): ReviewItem[] {
  const known = items.some((item) => item.subreddit === serverItem.subreddit);
  if (!known) {
    return [...items, serverItem];
  }
  return items.map((item) =>
    item.subreddit === serverItem.subreddit ? serverItem : item,
  );
}

/** Drop the optimistic edit when the server rejected the decision. */
export function rollback(
  items: ReviewItem[],
  subreddit: string,
  original: ReviewItem[],
): ReviewItem[] {
  const before = original.find((item) => item.subreddit === subreddit);
  if (!before) {
    return items.filter((item) => item.subreddit !== subreddit);
  }
  return items.map((item) => (item.subreddit === subreddit ? before : item));
}

export function retrainEnabled(metrics: Metrics): boolean {
  return metrics.training_queue > 0;
}

export function topFactorName(item: ReviewItem): string {
  return item.top_factors.length ? item.top_factors[0][0] : "";
}

export function pendingCount(items: ReviewItem[]): number {
  return items.filter((item) => item.status === "pending").length;
}

// Dashboard entry point: pending-flag queue, community dossier, label
// submission, retrain trigger. UI state is derived from API responses;
// the only client-side state is which row is selected and the sort order.

import { ApiClient, ApiError } from "./api.js";
import { factorBarsSvg, seriesSvg } from "./chart.js";
import {
  applyDecision,
  filterItems,
  reconcile,
  retrainEnabled,
  rollback,
  sortItems,
  topFactorName,
  type SortKey,
} from "./state.js";
import type { Decision, Metrics, ReviewItem } from "./types.js";

const api = new ApiClient("");

let items: ReviewItem[] = [];
let metrics: Metrics | null = null;
let selected: string | null = null;
let sortKey: SortKey = "score";
let sortDescending = true;
let statusFilter = "pending";
const actor = "dashboard-admin";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function setMessage(text: string, isError = false): void {
  const box = el<HTMLDivElement>("message");
  box.textContent = text;
  box.className = isError ? "message error" : "message";
}

async function refreshQueue(): Promise<void> {
  items = await api.flags();
  renderQueue();
}

async function refreshMetrics(): Promise<void> {
  metrics = await api.metrics();
  renderMetrics();
}

function renderMetrics(): void {
  if (!metrics) return;
  el("metric-pending").textContent = String(metrics.pending);
  el("metric-tp").textContent = String(metrics.tp);
  el("metric-fn").textContent = String(metrics.fn);
  el("metric-dismissed").textContent = String(metrics.dismissed);
  el("metric-lead").textContent = metrics.mean_lead_time.toFixed(1);
  el("metric-version").textContent = `v${metrics.model_version}`;
  el("metric-queue").textContent = String(metrics.training_queue);
  const button = el<HTMLButtonElement>("retrain");
  button.disabled = !retrainEnabled(metrics);
}

function renderQueue(): void {
  const visible = sortItems(
    filterItems(items, statusFilter === "all" ? {} : { status: statusFilter }),
    sortKey,
    sortDescending,
  );
  const tbody = el<HTMLTableSectionElement>("queue-body");
  tbody.replaceChildren(
    ...visible.map((item) => {
      const row = document.createElement("tr");
      if (item.subreddit === selected) row.classList.add("selected");
      row.innerHTML = `
        <td>${item.subreddit}</td>
        <td>${item.score.toFixed(3)}</td>
        <td>${item.flagged_month ?? "—"}</td>
        <td class="mono">${topFactorName(item)}</td>
        <td><span class="status ${item.status}">${item.status}</span></td>`;
      row.addEventListener("click", () => void selectItem(item.subreddit));
      return row;
    }),
  );
  el("queue-count").textContent = `${visible.length} shown`;
}

async function selectItem(subreddit: string): Promise<void> {
  selected = subreddit;
  renderQueue();
  const panel = el<HTMLDivElement>("dossier");
  panel.classList.remove("hidden");
  el("dossier-title").textContent = subreddit;
  try {
    const dossier = await api.dossier(subreddit);
    el("dossier-score").textContent = dossier.score.toFixed(3);
    el("dossier-status").textContent = dossier.status;
    el("chart-vocab").innerHTML = seriesSvg(dossier.evolution.vocabulary, "vocabulary distance by month");
    el("chart-user").innerHTML = seriesSvg(dossier.evolution.user, "user-base distance by month");
    el("factors").innerHTML = factorBarsSvg(dossier.top_factors);
    const rows = Object.entries(dossier.features)
      .filter(([, v]) => v !== 0)
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([k, v]) => `<tr><td class="mono">${k}</td><td>${v.toFixed(4)}</td></tr>`)
      .join("");
    el("feature-body").innerHTML = rows || "<tr><td colspan=2>all zero</td></tr>";
  } catch (err) {
    setMessage(err instanceof Error ? err.message : String(err), true);
  }
}

async function decide(decision: Decision): Promise<void> {
  if (!selected) {
    setMessage("select a community first", true);
    return;
  }
  const snapshot = items;
  items = applyDecision(items, selected, decision, actor);
  renderQueue();
  try {
    const result = await api.submitLabel(selected, decision, actor);
    items = reconcile(items, result.item);
    setMessage(
      `${selected}: ${result.outcome}` +
        (result.training_delta ? " (training row queued)" : ""),
    );
  } catch (err) {
    items = rollback(items, selected, snapshot);
    if (err instanceof ApiError) {
      setMessage(`${err.code}: ${err.message}`, true);
      if (err.code === "conflict") await refreshQueue();
    } else {
      setMessage(String(err), true);
    }
  }
  renderQueue();
  await refreshMetrics();
}

async function retrain(): Promise<void> {
  try {
    const result = await api.retrain();
    setMessage(
      result.retrained
        ? `retrained: model v${result.version} (+${result.new_rows} rows)`
        : `retrain skipped: ${result.reason}`,
    );
  } catch (err) {
    setMessage(err instanceof Error ? err.message : String(err), true);
  }
  await refreshMetrics();
  if (selected) await selectItem(selected);
}

function wireControls(): void {
  el<HTMLButtonElement>("decide-intervene").addEventListener("click", () => void decide("intervened"));
  el<HTMLButtonElement>("decide-dismiss").addEventListener("click", () => void decide("dismissed"));
  el<HTMLButtonElement>("retrain").addEventListener("click", () => void retrain());
  el<HTMLSelectElement>("status-filter").addEventListener("change", (ev) => {
    statusFilter = (ev.target as HTMLSelectElement).value;
    renderQueue();
  });
  for (const th of document.querySelectorAll<HTMLTableCellElement>("th[data-sort]")) {
    th.addEventListener("click", () => {
      const key = th.dataset.sort as SortKey;
      if (key === sortKey) {
        sortDescending = !sortDescending;
      } else {
        sortKey = key;
        sortDescending = key === "score";
      }
      renderQueue();
    });
  }
}

async function init(): Promise<void> {
  wireControls();
  try {
    await Promise.all([refreshQueue(), refreshMetrics()]);
    setMessage("connected");
  } catch (err) {
    setMessage(`cannot reach service: ${err instanceof Error ? err.message : err}`, true);
  }
  setInterval(() => void refreshMetrics().catch(() => undefined), 10_000);
}

void init();

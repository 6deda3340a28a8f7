"""Continuous-learning deployment loop.

Each month the model scores every live community on that month's features.
Flagged-and-eventually-intervened communities are true positives; flagged
communities that never see an intervention stay in the queue as false
positives; communities intervened while unflagged are false negatives and
become next month's training rows, which is how the model tracks policy
shifts it was never originally taught.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..corpus import CorpusStore, StateId
from ..features import FeatureContext, feature_schema, single_month_row
from ..months import month_range, months_between
from .learners import Hyperparameters, ModelArtifact, predict_proba, train

ORACLE = "oracle"  # test harness: scores equal the eventual labels


@dataclass
class SimulationLedger:
    start_month: str
    end_month: str
    flagged_by_month: dict[str, list[str]] = field(default_factory=dict)
    tp_by_month: dict[str, list[str]] = field(default_factory=dict)
    fn_by_month: dict[str, list[str]] = field(default_factory=dict)
    first_flag: dict[str, str] = field(default_factory=dict)
    lead_time: dict[str, int] = field(default_factory=dict)  # whole months
    false_positives: list[str] = field(default_factory=list)  # never intervened
    training_size_by_month: dict[str, int] = field(default_factory=dict)
    model_versions: int = 1
    final_artifact: ModelArtifact | None = None

    def totals(self) -> dict:
        return {
            "tp": sum(len(v) for v in self.tp_by_month.values()),
            "fn": sum(len(v) for v in self.fn_by_month.values()),
            "fp": len(self.false_positives),
            "mean_lead_time": (
                float(np.mean(list(self.lead_time.values()))) if self.lead_time else 0.0
            ),
            "model_versions": self.model_versions,
        }

    def to_json(self) -> str:
        payload = {
            "format": "modwatch.simulation.v1",
            "start_month": self.start_month,
            "end_month": self.end_month,
            "flagged_by_month": self.flagged_by_month,
            "tp_by_month": self.tp_by_month,
            "fn_by_month": self.fn_by_month,
            "first_flag": self.first_flag,
            "lead_time": self.lead_time,
            "false_positives": self.false_positives,
            "training_size_by_month": self.training_size_by_month,
            "totals": self.totals(),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def initial_training_rows(
    ctx: FeatureContext, window_start: str, window_end: str
) -> tuple[list[list[float]], list[int]]:
    """Single-month rows for every (community, month) in the initial window.

    Labels reflect what was known at window_end: a community is positive
    only if its intervention is dated at or before the window end. Months
    after a community's intervention are not rows (dead communities).
    """
    schema = feature_schema(ctx.lexicon)
    data: list[list[float]] = []
    labels: list[int] = []
    for sub in ctx.states.subreddits():
        iv = ctx.store.intervention_month(sub)
        for month in ctx.states.active_months(sub):
            if not (window_start <= month <= window_end):
                continue
            if iv is not None and month > iv:
                continue
            row = single_month_row(ctx, sub, month)
            data.append([row.values[name] for name in schema])
            labels.append(1 if iv is not None and iv <= window_end else 0)
    return data, labels


def simulate_continuous(
    store: CorpusStore,
    ctx: FeatureContext,
    initial_window: tuple[str, str],
    start_month: str,
    end_month: str,
    kind: str,
    sampling: str = "adasyn",
    seed: int = 0,
    hyper: Hyperparameters | None = None,
    threshold: float = 0.5,
) -> SimulationLedger:
    """Run the monthly flag/compare/retrain loop from start to end month.

    kind may be "oracle" for harness runs: the oracle scores 1 exactly for
    communities with an eventual intervention, so every one of them is
    flagged at its first scored month.
    """
    if not (store.window_start <= start_month <= store.window_end):
        raise ValueError(f"start month {start_month} outside corpus window")
    future_iv = [iv for iv in store.interventions if iv.date >= start_month]
    if not future_iv:
        raise ValueError("no interventions after the start month; nothing to simulate")

    schema = feature_schema(ctx.lexicon)
    hyper = hyper or Hyperparameters()
    ledger = SimulationLedger(start_month=start_month, end_month=end_month)

    train_X, train_y = initial_training_rows(ctx, initial_window[0], initial_window[1])
    artifact: ModelArtifact | None = None
    if kind != ORACLE:
        artifact = train(
            np.asarray(train_X), np.asarray(train_y), kind, schema,
            hyper=hyper, sampling=sampling, seed=seed,
            metadata={"window": f"{initial_window[0]}..{initial_window[1]}"},
        )

    intervention = {
        sub: store.intervention_month(sub) for sub in store.subreddits()
    }
    retired: set[str] = set()

    for month in month_range(start_month, end_month):
        flagged_now: list[str] = []
        cohort = [sid.subreddit for sid in ctx.states.month_cohort(month)]
        for sub in cohort:
            iv = intervention.get(sub)
            if sub in retired or (iv is not None and iv < month):
                continue
            if sub in ledger.first_flag:
                continue  # already pending; no duplicate flags
            if kind == ORACLE:
                score = 1.0 if iv is not None else 0.0
            else:
                row = single_month_row(ctx, sub, month)
                vec = np.asarray([row.values[name] for name in schema])
                score = predict_proba(artifact, vec)
            if score >= threshold:
                ledger.first_flag[sub] = month
                flagged_now.append(sub)
        ledger.flagged_by_month[month] = flagged_now

        new_fn_rows: list[tuple[list[float], int]] = []
        tp_now, fn_now = [], []
        for sub in sorted(s for s, iv in intervention.items() if iv == month):
            if sub not in ctx.states.subreddits():
                continue
            if sub in ledger.first_flag:
                tp_now.append(sub)
                ledger.lead_time[sub] = months_between(ledger.first_flag[sub], month)
            else:
                fn_now.append(sub)
                row = single_month_row(ctx, sub, month)
                new_fn_rows.append(([row.values[name] for name in schema], 1))
            retired.add(sub)
        ledger.tp_by_month[month] = tp_now
        ledger.fn_by_month[month] = fn_now

        if new_fn_rows:
            for vec, label in new_fn_rows:
                train_X.append(vec)
                train_y.append(label)
            if kind != ORACLE:
                artifact = train(
                    np.asarray(train_X), np.asarray(train_y), kind, schema,
                    hyper=hyper, sampling=sampling, seed=seed,
                    metadata={"window": f"{initial_window[0]}..{month}"},
                )
                ledger.model_versions += 1
        ledger.training_size_by_month[month] = len(train_y)

    ledger.false_positives = sorted(
        sub for sub in ledger.first_flag if intervention.get(sub) is None
    )
    ledger.final_artifact = artifact
    return ledger

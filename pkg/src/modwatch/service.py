"""Human-in-the-loop review service.

A single-writer command core (flag cycles, label decisions, retrains) over
an append-only NDJSON event log. State is a pure function of corpus +
config + log: a restarted service replays the log and lands on exactly the
same queue, ledger, and model bytes. Reads never mutate.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .corpus import CorpusStore
from .features import FeatureContext, feature_schema, single_month_row
from .models import (
    Hyperparameters,
    ModelArtifact,
    artifact_hash,
    predict_proba,
    train,
)
from .models.continual import initial_training_rows
from .months import months_between
from .pipeline import EvolutionAnalysis

PENDING = "pending"
INTERVENED = "intervened"
DISMISSED = "dismissed"
DECISIONS = (INTERVENED, DISMISSED)


class ServiceError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass
class ReviewItem:
    subreddit: str
    flagged_month: str | None
    score: float
    top_factors: list[tuple[str, float]]
    status: str = PENDING
    decided_by: str = ""
    decided_at: str = ""  # month of the decision

    def to_dict(self) -> dict:
        d = asdict(self)
        d["top_factors"] = [[name, value] for name, value in self.top_factors]
        return d


@dataclass
class ServiceLedger:
    tp: int = 0
    fn: int = 0
    dismissed: int = 0
    lead_times: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fn": self.fn,
            "dismissed": self.dismissed,
            "mean_lead_time": (
                float(np.mean(self.lead_times)) if self.lead_times else 0.0
            ),
        }


class EventLog:
    """Append-only NDJSON event log; replaying it rebuilds service state."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, event: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()

    def read_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        events = []
        for line in self.path.read_text("utf-8").splitlines():
            line = line.strip()
            if line:
                events.append(json.loads(line))
        return events


class ModerationService:
    """Flag queue + dossier + label + retrain over one corpus.

    Commands are serialized behind a lock (single writer); dossier and
    queue reads work off the immutable corpus and current state.
    """

    def __init__(
        self,
        store: CorpusStore,
        ctx: FeatureContext,
        analysis: EvolutionAnalysis,
        data_dir: str | Path,
        initial_window: tuple[str, str],
        model_kind: str = "forest",
        sampling: str = "adasyn",
        seed: int = 0,
        hyper: Hyperparameters | None = None,
        threshold: float = 0.5,
    ):
        self.store = store
        self.ctx = ctx
        self.analysis = analysis
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.initial_window = initial_window
        self.model_kind = model_kind
        self.sampling = sampling
        self.seed = seed
        self.hyper = hyper or Hyperparameters()
        self.threshold = threshold
        self.schema = feature_schema(ctx.lexicon)

        self._lock = threading.Lock()
        self.items: dict[str, ReviewItem] = {}
        self.ledger = ServiceLedger()
        self.current_month = initial_window[1]
        self.training_queue: list[tuple[list[float], int]] = []
        self.log = EventLog(self.data_dir / "events.ndjson")

        base_X, base_y = initial_training_rows(ctx, *initial_window)
        self._train_X: list[list[float]] = base_X
        self._train_y: list[int] = base_y
        self.model_version = 1
        self.model = self._fit(version=1)
        self._persist_model()

        for event in self.log.read_all():
            self._apply(event, replaying=True)

    # -- model plumbing ------------------------------------------------------

    def _fit(self, version: int) -> ModelArtifact:
        return train(
            np.asarray(self._train_X),
            np.asarray(self._train_y),
            self.model_kind,
            self.schema,
            hyper=self.hyper,
            sampling=self.sampling,
            seed=self.seed,
            metadata={
                "window": f"{self.initial_window[0]}..{self.initial_window[1]}",
                "version": version,
            },
        )

    def _persist_model(self) -> None:
        self.model.save(self.data_dir / f"model-v{self.model_version}.json")

    def _row_vector(self, subreddit: str, month: str) -> np.ndarray:
        active = [m for m in self.ctx.states.active_months(subreddit) if m <= month]
        use_month = active[-1] if active else month
        row = single_month_row(self.ctx, subreddit, use_month)
        return np.asarray([row.values[name] for name in self.schema])

    def _top_factors(self, vec: np.ndarray, k: int = 5) -> list[tuple[str, float]]:
        """Per-feature contribution: logistic uses weight * standardized
        value, trees use Gini importance * standardized value."""
        mean = np.asarray(self.model.standardization["mean"])
        std = np.asarray(self.model.standardization["std"])
        z = (vec - mean) / std
        if self.model.kind == "logistic":
            sources = self.model.members or [self.model.params]
            weights = np.mean([m["weights"] for m in sources], axis=0)
            contrib = weights * z
        else:
            imp = np.asarray([self.model.importances[n] for n in self.schema])
            contrib = imp * z
        order = np.argsort(-np.abs(contrib), kind="stable")[:k]
        return [(self.schema[i], float(contrib[i])) for i in order]

    # -- commands -------------------------------------------------------------

    def _apply(self, event: dict, replaying: bool) -> dict:
        etype = event.get("type")
        if etype == "cycle":
            return self._do_flag_cycle(event["month"], replaying)
        if etype == "label":
            return self._do_submit_label(
                event["subreddit"], event["decision"], event["actor"],
                event.get("month"), replaying,
            )
        if etype == "retrain":
            return self._do_retrain(replaying)
        raise ServiceError("bad_event", f"unknown event type {etype!r}")

    def flag_cycle(self, month: str) -> list[ReviewItem]:
        with self._lock:
            result = self._do_flag_cycle(month, replaying=False)
        return result["items"]

    def _do_flag_cycle(self, month: str, replaying: bool) -> dict:
        if self.model is None:
            raise ServiceError("no_model", "no model available for flagging")
        new_items = []
        for sid in self.ctx.states.month_cohort(month):
            sub = sid.subreddit
            if sub in self.items:
                continue  # pending or decided: no duplicates
            iv = self.store.intervention_month(sub)
            if iv is not None and iv < month:
                continue  # already intervened on-platform
            vec = self._row_vector(sub, month)
            score = predict_proba(self.model, vec)
            if score >= self.threshold:
                item = ReviewItem(
                    subreddit=sub,
                    flagged_month=month,
                    score=float(score),
                    top_factors=self._top_factors(vec),
                )
                self.items[sub] = item
                new_items.append(item)
        self.current_month = max(self.current_month, month)
        if not replaying:
            self.log.append({"type": "cycle", "month": month})
        return {"items": new_items, "month": month}

    def submit_label(
        self, subreddit: str, decision: str, actor: str, month: str | None = None
    ) -> dict:
        with self._lock:
            return self._do_submit_label(subreddit, decision, actor, month, replaying=False)

    def _do_submit_label(
        self, subreddit: str, decision: str, actor: str, month: str | None, replaying: bool
    ) -> dict:
        if decision not in DECISIONS:
            raise ServiceError("bad_decision", f"decision must be one of {DECISIONS}")
        month = month or self.current_month
        item = self.items.get(subreddit)
        if item is not None and item.status != PENDING:
            raise ServiceError("conflict", f"{subreddit} already decided: {item.status}")

        delta = False
        outcome = ""
        if item is None:
            if decision == DISMISSED:
                raise ServiceError("not_found", f"no flagged item for {subreddit}")
            # out-of-band intervention the model never flagged: false negative
            item = ReviewItem(subreddit=subreddit, flagged_month=None, score=0.0, top_factors=[])
            self.items[subreddit] = item
            self.ledger.fn += 1
            outcome = "fn"
        elif decision == INTERVENED:
            self.ledger.tp += 1
            self.ledger.lead_times.append(months_between(item.flagged_month, month))
            outcome = "tp"
        else:
            self.ledger.dismissed += 1
            outcome = "dismissed"

        item.status = INTERVENED if decision == INTERVENED else DISMISSED
        item.decided_by = actor
        item.decided_at = month

        if decision == INTERVENED:
            vec = self._row_vector(subreddit, month)
            self.training_queue.append(([float(v) for v in vec], 1))
            delta = True

        if not replaying:
            self.log.append(
                {
                    "type": "label",
                    "subreddit": subreddit,
                    "decision": decision,
                    "actor": actor,
                    "month": month,
                }
            )
        return {"item": item, "outcome": outcome, "training_delta": delta}

    def retrain(self) -> dict:
        with self._lock:
            return self._do_retrain(replaying=False)

    def _do_retrain(self, replaying: bool) -> dict:
        if not self.training_queue:
            return {"retrained": False, "version": self.model_version, "reason": "empty queue"}
        pending_rows = list(self.training_queue)
        candidate_X = self._train_X + [r for r, _ in pending_rows]
        candidate_y = self._train_y + [l for _, l in pending_rows]
        if len(set(candidate_y)) < 2:
            raise ServiceError("single_class", "augmented training set has a single class")
        self._train_X = candidate_X
        self._train_y = candidate_y
        self.training_queue.clear()
        self.model_version += 1
        self.model = self._fit(version=self.model_version)
        self._persist_model()
        if not replaying:
            self.log.append({"type": "retrain"})
        return {"retrained": True, "version": self.model_version, "new_rows": len(pending_rows)}

    # -- reads ---------------------------------------------------------------

    def flags(self, status: str | None = None) -> list[ReviewItem]:
        items = sorted(self.items.values(), key=lambda it: (-it.score, it.subreddit))
        if status:
            items = [it for it in items if it.status == status]
        return items

    def dossier(self, subreddit: str, month: str | None = None) -> dict:
        if subreddit not in self.ctx.states.subreddits():
            raise ServiceError("not_found", f"unknown community {subreddit!r}")
        month = month or self.current_month
        vec = self._row_vector(subreddit, month)
        score = predict_proba(self.model, vec)
        series = {}
        for kind in ("vocabulary", "user"):
            try:
                s = self.analysis.series(subreddit, kind)
                series[kind] = [[m1, m2, d] for m1, m2, d in s.points]
            except ValueError:
                series[kind] = []
        item = self.items.get(subreddit)
        return {
            "subreddit": subreddit,
            "month": month,
            "features": {name: float(v) for name, v in zip(self.schema, vec)},
            "evolution": series,
            "score": float(score),
            "top_factors": [[n, v] for n, v in self._top_factors(vec)],
            "status": item.status if item else "unflagged",
        }

    def model_info(self) -> dict:
        return {
            "version": self.model_version,
            "kind": self.model.kind,
            "hash": artifact_hash(self.model),
            "importances": self.model.importances,
            "metadata": self.model.metadata,
        }

    def metrics(self) -> dict:
        out = self.ledger.to_dict()
        out["pending"] = sum(1 for it in self.items.values() if it.status == PENDING)
        out["model_version"] = self.model_version
        out["training_queue"] = len(self.training_queue)
        out["current_month"] = self.current_month
        return out

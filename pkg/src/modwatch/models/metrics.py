"""Evaluation metrics for imbalanced binary classification: rank-based AUC
plus a separate F1 for each class, as accuracy is useless at 1:12 skew."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .learners import ModelArtifact, predict_proba_many


def auc_score(labels: np.ndarray, scores: np.ndarray) -> float:
    """Area under the ROC via the rank statistic; score ties count 1/2.

    Equivalent to the Mann-Whitney pair count: the probability a random
    positive outranks a random negative.
    """
    labels = np.asarray(labels, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: test labels contain a single class")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # average rank, 1-based
        i = j + 1
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def f1_scores(labels: np.ndarray, predicted: np.ndarray) -> tuple[float, float]:
    """(f1 for the negative class, f1 for the positive class)."""

    def f1(cls: int) -> float:
        tp = int(((predicted == cls) & (labels == cls)).sum())
        fp = int(((predicted == cls) & (labels != cls)).sum())
        fn = int(((predicted != cls) & (labels == cls)).sum())
        denom = 2 * tp + fp + fn
        return 2 * tp / denom if denom else 0.0

    labels = np.asarray(labels, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    return f1(0), f1(1)


@dataclass
class EvalReport:
    window: str
    auc: float | None  # None when the test labels are single-class
    f1_negative: float
    f1_positive: float
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def test_size(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "auc": self.auc,
            "f1_negative": self.f1_negative,
            "f1_positive": self.f1_positive,
            "confusion": {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp},
        }


def evaluate(
    artifact: ModelArtifact,
    X: np.ndarray,
    labels: np.ndarray,
    threshold: float = 0.5,
    window: str = "Total",
) -> EvalReport:
    """Score the test rows and report AUC, per-class F1, and the confusion
    counts. A single-class test set leaves AUC as None (undefined) but the
    F1 numbers are still meaningful."""
    labels = np.asarray(labels, dtype=np.int64)
    scores = predict_proba_many(artifact, X)
    predicted = (scores >= threshold).astype(np.int64)
    try:
        auc = auc_score(labels, scores)
    except ValueError:
        auc = None
    f1_neg, f1_pos = f1_scores(labels, predicted)
    return EvalReport(
        window=window,
        auc=auc,
        f1_negative=f1_neg,
        f1_positive=f1_pos,
        tn=int(((predicted == 0) & (labels == 0)).sum()),
        fp=int(((predicted == 1) & (labels == 0)).sum()),
        fn=int(((predicted == 0) & (labels == 1)).sum()),
        tp=int(((predicted == 1) & (labels == 1)).sum()),
    )

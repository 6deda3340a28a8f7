"""The evaluation protocol: stratified 80/20 holdout, five-fold CV on the
training side with resampling confined to each fold's training rows, and
quarter-prefix windows (Q1 through Total)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import FeatureRow, LABEL_INTERVENED
from .learners import Hyperparameters, ModelArtifact, train
from .metrics import EvalReport, evaluate

WINDOWS = ("Q1", "Q1+Q2", "Q1+Q2+Q3", "Total")

_WINDOW_QUARTERS = {
    "Q1": (1,),
    "Q1+Q2": (1, 2),
    "Q1+Q2+Q3": (1, 2, 3),
    "Total": (1, 2, 3, 4),
}


def build_window_matrix(
    rows: list[FeatureRow], window: str, schema: list[str]
) -> tuple[np.ndarray, np.ndarray, list[str], list[str]]:
    """Concatenate each subreddit's quarter rows for the window.

    Returns (X, y, feature_names, subreddits); only communities with all
    four quarters extracted participate, so every row has the same width.
    """
    if window not in _WINDOW_QUARTERS:
        raise ValueError(f"unknown window {window!r}; expected one of {WINDOWS}")
    quarters = _WINDOW_QUARTERS[window]
    by_sub: dict[str, dict[int, FeatureRow]] = {}
    for row in rows:
        by_sub.setdefault(row.subreddit, {})[row.quarter.index] = row

    feature_names = [f"q{q}_{name}" for q in quarters for name in schema]
    data, labels, subreddits = [], [], []
    for sub in sorted(by_sub):
        qrows = by_sub[sub]
        if set(qrows) != {1, 2, 3, 4}:
            continue
        vec = [qrows[q].values[name] for q in quarters for name in schema]
        data.append(vec)
        labels.append(1 if qrows[1].label == LABEL_INTERVENED else 0)
        subreddits.append(sub)
    if not data:
        raise ValueError("no complete four-quarter communities in the rows")
    return (
        np.asarray(data, dtype=np.float64),
        np.asarray(labels, dtype=np.int64),
        feature_names,
        subreddits,
    )


def stratified_holdout_split(
    labels: np.ndarray, test_fraction: float = 0.2, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """(train_idx, holdout_idx) with test_fraction of each class held out."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        idx = np.where(labels == cls)[0]
        if len(idx) < 2:
            raise ValueError(f"class {cls} has {len(idx)} rows; cannot stratify")
        perm = rng.permutation(idx)
        n_test = max(1, int(round(len(idx) * test_fraction)))
        test_idx.extend(perm[:n_test])
        train_idx.extend(perm[n_test:])
    return np.sort(np.asarray(train_idx)), np.sort(np.asarray(test_idx))


def stratified_kfold(labels: np.ndarray, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """k validation-index arrays partitioning the rows; per-fold class
    counts differ from perfect proportionality by at most one row."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in (0, 1):
        idx = np.where(labels == cls)[0]
        if len(idx) < k:
            raise ValueError(f"class {cls} has {len(idx)} rows; needs >= {k} for {k}-fold CV")
        perm = rng.permutation(idx)
        for pos, row in enumerate(perm):
            folds[pos % k].append(int(row))
    return [np.sort(np.asarray(f)) for f in folds]


@dataclass
class ProtocolResult:
    window: str
    cv_reports: list[EvalReport]
    holdout_report: EvalReport
    model: ModelArtifact
    holdout_index: np.ndarray
    train_index: np.ndarray
    subreddits: list[str]

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "cv": [r.to_dict() for r in self.cv_reports],
            "cv_mean_auc": float(
                np.mean([r.auc for r in self.cv_reports if r.auc is not None])
            ),
            "holdout": self.holdout_report.to_dict(),
        }


def protocol_run(
    rows: list[FeatureRow],
    window: str,
    kind: str,
    sampling: str,
    seed: int,
    schema: list[str],
    hyper: Hyperparameters | None = None,
    threshold: float = 0.5,
) -> ProtocolResult:
    """80/20 stratified split, 5-fold CV on the 80% (resampling only ever
    touches a fold's training portion), then a final fit on the full
    training side evaluated on the untouched holdout."""
    X, y, feature_names, subreddits = build_window_matrix(rows, window, schema)
    train_idx, holdout_idx = stratified_holdout_split(y, 0.2, seed)
    X_train, y_train = X[train_idx], y[train_idx]

    cv_reports = []
    for fold_no, val_local in enumerate(stratified_kfold(y_train, 5, seed)):
        mask = np.ones(len(y_train), dtype=bool)
        mask[val_local] = False
        artifact = train(
            X_train[mask], y_train[mask], kind, feature_names,
            hyper=hyper, sampling=sampling, seed=seed,
            metadata={"window": window, "fold": fold_no},
        )
        cv_reports.append(
            evaluate(artifact, X_train[val_local], y_train[val_local], threshold, window)
        )

    final = train(
        X_train, y_train, kind, feature_names,
        hyper=hyper, sampling=sampling, seed=seed,
        metadata={"window": window, "fold": None},
    )
    holdout_report = evaluate(final, X[holdout_idx], y[holdout_idx], threshold, window)
    return ProtocolResult(
        window=window,
        cv_reports=cv_reports,
        holdout_report=holdout_report,
        model=final,
        holdout_index=holdout_idx,
        train_index=train_idx,
        subreddits=subreddits,
    )

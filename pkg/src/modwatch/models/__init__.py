"""Interpretable classifiers, evaluation protocol, and the continual loop."""

from .learners import (
    Hyperparameters,
    ModelArtifact,
    artifact_hash,
    gini_importances,
    odds_ratios,
    predict_proba,
    predict_proba_many,
    train,
)
from .metrics import EvalReport, auc_score, evaluate, f1_scores
from .protocol import (
    ProtocolResult,
    WINDOWS,
    build_window_matrix,
    protocol_run,
    stratified_holdout_split,
    stratified_kfold,
)
from .continual import SimulationLedger, simulate_continuous

__all__ = [
    "Hyperparameters",
    "ModelArtifact",
    "artifact_hash",
    "train",
    "predict_proba",
    "predict_proba_many",
    "odds_ratios",
    "gini_importances",
    "EvalReport",
    "auc_score",
    "f1_scores",
    "evaluate",
    "WINDOWS",
    "ProtocolResult",
    "build_window_matrix",
    "protocol_run",
    "stratified_holdout_split",
    "stratified_kfold",
    "SimulationLedger",
    "simulate_continuous",
]

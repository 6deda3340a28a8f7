"""From-scratch interpretable learners.

Logistic regression (L2, gradient descent with backtracking line search),
CART with Gini splitting, and a bagged random forest with per-split feature
subsets. Everything is deterministic under its seed and serializes to
canonical JSON, so identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from ..sampling import adasyn, ensemble_undersample, random_oversample

KINDS = ("logistic", "tree", "forest")
SAMPLING_STRATEGIES = ("none", "adasyn", "oversample", "ensemble")


@dataclass
class Hyperparameters:
    max_depth: int = 12
    min_leaf: int = 2
    n_trees: int = 100
    l2: float = 1.0
    tol: float = 1e-8
    max_iter: int = 200_000
    adasyn_k: int = 5
    adasyn_beta: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ModelArtifact:
    kind: str
    feature_names: list[str]
    standardization: dict  # {"mean": [...], "std": [...]}
    params: dict  # single fitted model (see learner param formats)
    members: list[dict] | None  # ensemble-undersampling members, same kind
    importances: dict[str, float]
    metadata: dict

    def to_json(self) -> str:
        payload = {
            "format": "modwatch.model.v1",
            "kind": self.kind,
            "feature_names": self.feature_names,
            "standardization": self.standardization,
            "params": self.params,
            "members": self.members,
            "importances": self.importances,
            "metadata": self.metadata,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ModelArtifact":
        raw = json.loads(text)
        if raw.get("format") != "modwatch.model.v1":
            raise ValueError(f"unsupported model format: {raw.get('format')!r}")
        return cls(
            kind=raw["kind"],
            feature_names=raw["feature_names"],
            standardization=raw["standardization"],
            params=raw["params"],
            members=raw["members"],
            importances=raw["importances"],
            metadata=raw["metadata"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "ModelArtifact":
        return cls.from_json(Path(path).read_text())


def artifact_hash(artifact: ModelArtifact) -> str:
    return hashlib.sha256(artifact.to_json().encode("utf-8")).hexdigest()


# -- logistic regression ---------------------------------------------------------


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_grad(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, float]:
    """Mean negative log-likelihood + (l2 / 2n) ||w||^2 (intercept free)."""
    n = len(y)
    z = X @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    nll = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    loss = nll + (l2 / (2 * n)) * float(w @ w)
    resid = p - y
    grad_w = X.T @ resid / n + (l2 / n) * w
    grad_b = float(np.mean(resid))
    return float(loss), grad_w, grad_b


def fit_logistic(
    X: np.ndarray, y: np.ndarray, l2: float = 1.0, tol: float = 1e-8, max_iter: int = 200_000
) -> dict:
    """Gradient descent with Armijo backtracking until the full gradient
    (weights and intercept) has 2-norm at most tol."""
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    step = 1.0
    loss, gw, gb = logistic_loss_grad(w, b, X, y, l2)
    for _ in range(max_iter):
        gnorm = math.sqrt(float(gw @ gw) + gb * gb)
        if gnorm <= tol:
            break
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            loss_new, gw_new, gb_new = logistic_loss_grad(w_new, b_new, X, y, l2)
            if loss_new <= loss - 1e-4 * step * gnorm * gnorm:
                break
            step *= 0.5
            if step < 1e-16:
                break
        if step < 1e-16:
            break
        w, b, loss, gw, gb = w_new, b_new, loss_new, gw_new, gb_new
        step *= 1.25
    return {
        "weights": [float(v) for v in w],
        "intercept": float(b),
        "l2": l2,
        "grad_norm": math.sqrt(float(gw @ gw) + gb * gb),
    }


# -- CART ------------------------------------------------------------------------


def _gini(pos: float, total: float) -> float:
    if total == 0:
        return 0.0
    p = pos / total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(
    X: np.ndarray, y: np.ndarray, feature_ids: np.ndarray, min_leaf: int
) -> tuple[int, float, float] | None:
    """(feature, threshold, impurity_decrease) maximizing the Gini decrease.

    Ties break on (feature index, threshold) so the tree is reproducible.
    """
    n = len(y)
    min_leaf = max(1, min_leaf)
    parent = _gini(float(y.sum()), n)
    best: tuple[float, int, float] | None = None  # (-decrease, feature, threshold)
    for f in feature_ids:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        pos_prefix = np.cumsum(ys)
        total_pos = pos_prefix[-1]
        # split puts the first i sorted rows left; both sides need min_leaf
        for i in range(min_leaf, n - min_leaf + 1):
            if xs[i - 1] == xs[i]:
                continue  # not a boundary between distinct values
            left_pos = float(pos_prefix[i - 1])
            right_pos = float(total_pos - left_pos)
            decrease = parent - (i / n) * _gini(left_pos, i) - ((n - i) / n) * _gini(
                right_pos, n - i
            )
            threshold = (xs[i - 1] + xs[i]) / 2.0
            key = (-decrease, int(f), float(threshold))
            if best is None or key < best:
                best = key
    if best is None or -best[0] <= 1e-15:
        return None
    return best[1], best[2], -best[0]


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int = 12,
    min_leaf: int = 2,
    rng: np.random.Generator | None = None,
    n_subset_features: int | None = None,
) -> dict:
    """CART with Gini splitting. Nodes are stored flat for serialization:
    internal {"f", "t", "l", "r", "n"}, leaf {"n", "p"} with p the positive
    fraction. Returns {"nodes": [...], "n_features": d, "raw_importance": [...]}.
    """
    n_total, d = X.shape
    nodes: list[dict] = []
    raw_importance = np.zeros(d)

    def grow(idx: np.ndarray, depth: int) -> int:
        ys = y[idx]
        n = len(idx)
        pos = float(ys.sum())
        node_id = len(nodes)
        nodes.append({})  # reserve slot
        is_pure = pos == 0.0 or pos == n
        if depth >= max_depth or n < 2 * min_leaf or is_pure:
            nodes[node_id] = {"n": n, "p": pos / n}
            return node_id
        if n_subset_features is not None and rng is not None:
            feats = np.sort(rng.choice(d, size=min(n_subset_features, d), replace=False))
        else:
            feats = np.arange(d)
        split = _best_split(X[idx], ys, feats, min_leaf)
        if split is None:
            nodes[node_id] = {"n": n, "p": pos / n}
            return node_id
        f, t, decrease = split
        raw_importance[f] += (n / n_total) * decrease
        mask = X[idx, f] <= t
        left = grow(idx[mask], depth + 1)
        right = grow(idx[~mask], depth + 1)
        nodes[node_id] = {"f": int(f), "t": float(t), "l": left, "r": right, "n": n}
        return node_id

    grow(np.arange(n_total), 0)
    return {
        "nodes": nodes,
        "n_features": d,
        "raw_importance": [float(v) for v in raw_importance],
    }


def tree_proba(params: dict, x: np.ndarray) -> float:
    nodes = params["nodes"]
    node = nodes[0]
    while "f" in node:
        node = nodes[node["l"]] if x[node["f"]] <= node["t"] else nodes[node["r"]]
    return float(node["p"])


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 100,
    max_depth: int = 12,
    min_leaf: int = 2,
    seed: int = 0,
) -> dict:
    """Bagged CART: bootstrap rows per tree, sqrt(d) random features per split."""
    n, d = X.shape
    subset = max(1, int(math.sqrt(d)))
    seeds = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        boot = rng.integers(0, n, size=n)
        tree = fit_tree(
            X[boot], y[boot], max_depth=max_depth, min_leaf=min_leaf,
            rng=rng, n_subset_features=subset,
        )
        trees.append(tree)
    return {"trees": trees, "n_features": d}


def forest_proba(params: dict, x: np.ndarray) -> float:
    trees = params["trees"]
    return float(sum(tree_proba(t, x) for t in trees) / len(trees))


# -- training front door -------------------------------------------------------------


def _standardize_params(X: np.ndarray) -> dict:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return {"mean": [float(v) for v in mean], "std": [float(v) for v in std]}


def apply_standardization(standardization: dict, X: np.ndarray) -> np.ndarray:
    mean = np.asarray(standardization["mean"])
    std = np.asarray(standardization["std"])
    return (np.asarray(X, dtype=np.float64) - mean) / std


def _fit_one(kind: str, X: np.ndarray, y: np.ndarray, hyper: Hyperparameters, seed: int) -> dict:
    if kind == "logistic":
        return fit_logistic(X, y, l2=hyper.l2, tol=hyper.tol, max_iter=hyper.max_iter)
    if kind == "tree":
        return fit_tree(X, y, max_depth=hyper.max_depth, min_leaf=hyper.min_leaf)
    if kind == "forest":
        return fit_forest(
            X, y, n_trees=hyper.n_trees, max_depth=hyper.max_depth,
            min_leaf=hyper.min_leaf, seed=seed,
        )
    raise ValueError(f"unknown model kind: {kind!r}")


def _resample(
    X: np.ndarray, y: np.ndarray, strategy: str, hyper: Hyperparameters, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    minority, majority = (1, 0) if (y == 1).sum() <= (y == 0).sum() else (0, 1)
    X_min, X_maj = X[y == minority], X[y == majority]
    if strategy == "adasyn":
        result = adasyn(X_min, X_maj, k=hyper.adasyn_k, beta=hyper.adasyn_beta, seed=seed)
        synth = result.synthetic
    elif strategy == "oversample":
        synth = random_oversample(X_min, X_maj, seed=seed)
    else:
        raise ValueError(f"unknown resampling strategy: {strategy!r}")
    if len(synth) == 0:
        return X, y
    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.full(len(synth), minority, dtype=y.dtype)])
    return X_out, y_out


def train(
    X: np.ndarray,
    y: np.ndarray,
    kind: str,
    feature_names: list[str],
    hyper: Hyperparameters | None = None,
    sampling: str = "none",
    seed: int = 0,
    metadata: dict | None = None,
) -> ModelArtifact:
    """Standardize, resample the training rows per the strategy, fit, and
    package the artifact with its importances and provenance."""
    hyper = hyper or Hyperparameters()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if np.isnan(X).any():
        raise ValueError("NaN feature value in training matrix")
    if len(np.unique(y)) < 2:
        raise ValueError("training set contains a single class")
    if kind not in KINDS:
        raise ValueError(f"unknown model kind: {kind!r}")
    if sampling not in SAMPLING_STRATEGIES:
        raise ValueError(f"unknown sampling strategy: {sampling!r}")

    standardization = _standardize_params(X)
    Xz = apply_standardization(standardization, X)

    members: list[dict] | None = None
    if sampling == "ensemble":
        minority, majority = (1, 0) if (y == 1).sum() <= (y == 0).sum() else (0, 1)
        maj_idx = np.where(y == majority)[0]
        min_idx = np.where(y == minority)[0]
        result = ensemble_undersample(Xz[maj_idx], Xz[min_idx], seed=seed)
        members = []
        for i, part in enumerate(result.partitions):
            rows = np.concatenate([maj_idx[part], min_idx])
            members.append(_fit_one(kind, Xz[rows], y[rows], hyper, seed + i))
        params = members[0]
    else:
        if sampling in ("adasyn", "oversample"):
            Xt, yt = _resample(Xz, y, sampling, hyper, seed)
        else:
            Xt, yt = Xz, y
        params = _fit_one(kind, Xt, yt, hyper, seed)

    meta = {
        "kind": kind,
        "sampling": sampling,
        "seed": seed,
        "hyperparameters": hyper.to_dict(),
        "n_training_rows": int(len(y)),
        "schema_version": "modwatch.features.v1",
        "version": 1,
    }
    if metadata:
        meta.update(metadata)

    artifact = ModelArtifact(
        kind=kind,
        feature_names=list(feature_names),
        standardization=standardization,
        params=params,
        members=members,
        importances={},
        metadata=meta,
    )
    artifact.importances = _importances(artifact)
    return artifact


def _importances(artifact: ModelArtifact) -> dict[str, float]:
    if artifact.kind == "logistic":
        sources = artifact.members or [artifact.params]
        weights = np.mean([np.abs(m["weights"]) for m in sources], axis=0)
        total = weights.sum()
        norm = weights / total if total > 0 else weights
        return {name: float(v) for name, v in zip(artifact.feature_names, norm)}
    return gini_importances(artifact)


def gini_importances(artifact: ModelArtifact) -> dict[str, float]:
    """Impurity-decrease importances, averaged over trees (and ensemble
    members), normalized to sum to 1."""
    if artifact.kind not in ("tree", "forest"):
        raise ValueError("Gini importances require a tree or forest model")
    sources = artifact.members or [artifact.params]
    acc = np.zeros(len(artifact.feature_names))
    count = 0
    for params in sources:
        trees = params["trees"] if artifact.kind == "forest" else [params]
        for t in trees:
            acc += np.asarray(t["raw_importance"])
            count += 1
    if count == 0 or acc.sum() == 0.0:
        return {name: 0.0 for name in artifact.feature_names}
    acc = acc / count
    acc = acc / acc.sum()
    return {name: float(v) for name, v in zip(artifact.feature_names, acc)}


def odds_ratios(artifact: ModelArtifact) -> dict[str, tuple[float, float]]:
    """feature -> (weight, exp(weight)) on the standardized scale; the
    scale itself is disclosed in artifact.standardization."""
    if artifact.kind != "logistic":
        raise ValueError("odds ratios require a logistic model")
    sources = artifact.members or [artifact.params]
    weights = np.mean([m["weights"] for m in sources], axis=0)
    return {
        name: (float(w), float(math.exp(w)))
        for name, w in zip(artifact.feature_names, weights)
    }


# -- prediction ------------------------------------------------------------------


def _member_proba(kind: str, params: dict, x: np.ndarray) -> float:
    if kind == "logistic":
        z = float(np.dot(params["weights"], x) + params["intercept"])
        return float(_sigmoid(np.asarray([z]))[0])
    if kind == "tree":
        return tree_proba(params, x)
    return forest_proba(params, x)


def predict_proba(artifact: ModelArtifact, row: np.ndarray) -> float:
    """Probability of the positive (intervened) class for one raw-scale row.

    Ensemble artifacts report the member vote fraction, which doubles as a
    score for ranking; ties at exactly 0.5 classify positive.
    """
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (len(artifact.feature_names),):
        raise ValueError(
            f"row has shape {row.shape}, schema needs ({len(artifact.feature_names)},)"
        )
    x = apply_standardization(artifact.standardization, row[None, :])[0]
    if artifact.members is not None:
        votes = [
            1 if _member_proba(artifact.kind, m, x) >= 0.5 else 0 for m in artifact.members
        ]
        return float(sum(votes) / len(votes))
    return _member_proba(artifact.kind, artifact.params, x)


def predict_proba_many(artifact: ModelArtifact, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return np.asarray([predict_proba(artifact, row) for row in X])

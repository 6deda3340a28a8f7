"""Class-imbalance handling, applied to training rows only.

ADASYN concentrates synthetic minority points near class borders by
allocating generation budget proportionally to each minority point's
majority-neighbor ratio. Ensemble undersampling splits the majority class
into minority-sized chunks and lets one classifier per chunk vote.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REAL = "real"
SYNTHETIC = "synthetic"


@dataclass
class OversampleResult:
    synthetic: np.ndarray  # (G, d) rows, label = minority
    allocation: np.ndarray  # per-minority-point synthetic counts
    ratios: np.ndarray  # r_i before normalization


def _knn_indices(points: np.ndarray, pool: np.ndarray, k: int, skip_self: bool) -> np.ndarray:
    """Indices into `pool` of each point's k nearest euclidean neighbors.

    Ties break on pool index so results are reproducible. With skip_self,
    pool row i is treated as point i itself and excluded (both callers lay
    the points out as a prefix of the pool).
    """
    d2 = ((points[:, None, :] - pool[None, :, :]) ** 2).sum(axis=2)
    order = np.argsort(d2, axis=1, kind="stable")
    if skip_self:
        out = np.empty((len(points), k), dtype=np.int64)
        for i in range(len(points)):
            row = [j for j in order[i] if j != i]
            out[i] = row[:k]
        return out
    return order[:, :k]


def adasyn(
    minority: np.ndarray,
    majority: np.ndarray,
    k: int = 5,
    beta: float = 1.0,
    seed: int = 0,
) -> OversampleResult:
    """Generate G = ceil((|maj| - |min|) * beta) synthetic minority rows.

    Per-point budget is proportional to r_i = (majority neighbors among the
    k nearest in the combined data) / k, uniform when every r_i is zero.
    Each synthetic point is x_i + lambda * (x_z - x_i) with lambda ~ U(0,1)
    and x_z one of x_i's k nearest minority neighbors, so every coordinate
    stays inside the generating segment's bounding box.
    """
    minority = np.asarray(minority, dtype=np.float64)
    majority = np.asarray(majority, dtype=np.float64)
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    if len(minority) >= len(majority):
        return OversampleResult(
            synthetic=np.empty((0, minority.shape[1])),
            allocation=np.zeros(len(minority), dtype=np.int64),
            ratios=np.zeros(len(minority)),
        )
    if len(minority) <= k:
        raise ValueError(f"ADASYN needs more than k={k} minority rows, got {len(minority)}")

    n_min, n_maj = len(minority), len(majority)
    total = int(np.ceil((n_maj - n_min) * beta))

    combined = np.vstack([minority, majority])
    neigh = _knn_indices(minority, combined, k, skip_self=True)
    ratios = (neigh >= n_min).sum(axis=1) / k  # pool index >= n_min means majority

    if ratios.sum() == 0.0:
        norm = np.full(n_min, 1.0 / n_min)
    else:
        norm = ratios / ratios.sum()

    # integer allocation summing exactly to `total`: floor + largest remainders
    raw = norm * total
    alloc = np.floor(raw).astype(np.int64)
    remainder = total - int(alloc.sum())
    if remainder > 0:
        frac_order = np.argsort(-(raw - alloc), kind="stable")
        for idx in frac_order[:remainder]:
            alloc[idx] += 1

    minority_neigh = _knn_indices(minority, minority, k, skip_self=True)
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_min):
        for _ in range(alloc[i]):
            z = minority[minority_neigh[i][rng.integers(0, k)]]
            lam = rng.random()
            rows.append(minority[i] + lam * (z - minority[i]))
    synthetic = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, minority.shape[1]))
    return OversampleResult(synthetic=synthetic, allocation=alloc, ratios=ratios)


def random_oversample(minority: np.ndarray, majority: np.ndarray, seed: int = 0) -> np.ndarray:
    """Baseline: duplicate random minority rows until the classes balance."""
    minority = np.asarray(minority, dtype=np.float64)
    majority = np.asarray(majority, dtype=np.float64)
    deficit = len(majority) - len(minority)
    if deficit <= 0:
        return np.empty((0, minority.shape[1]))
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, len(minority), size=deficit)
    return minority[picks].copy()


@dataclass
class UndersampleResult:
    partitions: list[np.ndarray]  # index arrays into the majority rows
    discarded: int


def ensemble_undersample(
    majority: np.ndarray, minority: np.ndarray, seed: int = 0
) -> UndersampleResult:
    """Split majority rows into n = floor(|maj| / |min|) disjoint partitions
    of exactly |min| rows each; leftover rows are discarded and reported.

    Returned partitions are index arrays; each training set is one
    partition plus the full minority class.
    """
    n_maj, n_min = len(majority), len(minority)
    if n_min == 0:
        raise ValueError("minority class is empty")
    if n_maj < n_min:
        raise ValueError(f"majority ({n_maj}) smaller than minority ({n_min})")
    n = n_maj // n_min
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_maj)
    partitions = [np.sort(order[i * n_min : (i + 1) * n_min]) for i in range(n)]
    return UndersampleResult(partitions=partitions, discarded=n_maj - n * n_min)


def majority_vote(labels: list[int]) -> int:
    """Strict majority of binary votes; ties go to the positive class, since
    the queue exists to surface candidates for human review."""
    if not labels:
        raise ValueError("majority_vote needs at least one vote")
    positives = sum(1 for v in labels if v == 1)
    return 1 if positives * 2 >= len(labels) else 0

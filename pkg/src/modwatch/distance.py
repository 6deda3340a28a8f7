"""Evolution measures over state vectors.

Absolute distance is plain cosine similarity. Relative distance ranks every
state's month-cohort neighbors by euclidean distance and compares the
rankings of consecutive months with rank-biased overlap (RBO), which
weights agreement at the top of the lists most heavily and tolerates
non-conjoint lists. distance = 1 - similarity throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .corpus import StateId

DEFAULT_RBO_P = 0.98


# -- sparse vector primitives -------------------------------------------------


def cosine_similarity(a: Mapping, b: Mapping) -> float:
    """Sum(a_i b_i) / (|a| |b|) over sparse mappings; error on zero vectors."""
    norm_a = math.sqrt(sum(v * v for v in a.values()))
    norm_b = math.sqrt(sum(v * v for v in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine similarity undefined for zero vector")
    if len(a) > len(b):
        a, b = b, a
    dot = sum(v * b[k] for k, v in a.items() if k in b)
    return dot / (norm_a * norm_b)


def euclidean_distance(a: Mapping, b: Mapping) -> float:
    total = 0.0
    for k, v in a.items():
        d = v - b.get(k, 0.0)
        total += d * d
    for k, v in b.items():
        if k not in a:
            total += v * v
    return math.sqrt(total)


# -- neighbor rankings ----------------------------------------------------------


@dataclass
class NeighborRanking:
    anchor: StateId
    ordered: list[StateId]
    cohort_month: str


def neighbor_ranking(
    anchor: StateId, cohort_vectors: Mapping[StateId, Mapping]
) -> NeighborRanking:
    """Cohort states sorted by ascending euclidean distance to the anchor.

    The anchor is excluded from its own list; distance ties break on the
    (subreddit, month) name so the order is strict.
    """
    if anchor not in cohort_vectors:
        raise ValueError(f"anchor {anchor} missing from cohort vectors")
    av = cohort_vectors[anchor]
    scored = sorted(
        (euclidean_distance(av, vec), sid)
        for sid, vec in cohort_vectors.items()
        if sid != anchor
    )
    return NeighborRanking(
        anchor=anchor, ordered=[sid for _, sid in scored], cohort_month=anchor.month
    )


def cohort_rankings(
    cohort_vectors: Mapping[StateId, Mapping], month: str
) -> dict[StateId, NeighborRanking]:
    """All rankings for one month's cohort in one pass.

    Equivalent to calling neighbor_ranking per anchor, but the pairwise
    distance matrix is computed densely with numpy, which is what makes
    corpus-scale runs practical.
    """
    sids = sorted(cohort_vectors)
    n = len(sids)
    if n == 0:
        return {}
    keys = sorted({k for vec in cohort_vectors.values() for k in vec})
    key_pos = {k: i for i, k in enumerate(keys)}
    mat = np.zeros((n, len(keys)), dtype=np.float64)
    for row, sid in enumerate(sids):
        for k, v in cohort_vectors[sid].items():
            mat[row, key_pos[k]] = v
    sq = np.sum(mat * mat, axis=1)
    gram = mat @ mat.T
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
    dist = np.sqrt(d2)

    rankings = {}
    for i, anchor in enumerate(sids):
        order = sorted(
            ((dist[i, j], sids[j]) for j in range(n) if j != i)
        )
        rankings[anchor] = NeighborRanking(
            anchor=anchor, ordered=[sid for _, sid in order], cohort_month=month
        )
    return rankings


# -- rank-biased overlap --------------------------------------------------------


def rbo(x1: Sequence[Hashable], x2: Sequence[Hashable], p: float = DEFAULT_RBO_P) -> float:
    """Extrapolated RBO similarity of two duplicate-free ranked lists.

    With A_d the overlap fraction of the depth-d prefixes and
    k = min(len(x1), len(x2)):

        similarity = (1 - p) * sum_{d=1..k} p^(d-1) * A_d  +  A_k * p^k

    The geometric weights give disagreement at top ranks the largest
    penalty; the tail is extrapolated at the observed agreement so
    identical lists score exactly 1 at finite depth.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if len(x1) == 0 or len(x2) == 0:
        raise ValueError("rbo undefined for empty lists")
    if len(set(x1)) != len(x1) or len(set(x2)) != len(x2):
        raise ValueError("ranked lists must be duplicate-free")

    k = min(len(x1), len(x2))
    seen1: set = set()
    seen2: set = set()
    overlap = 0
    weighted = 0.0
    weight = 1.0  # p^(d-1)
    agreement = 0.0
    for d in range(1, k + 1):
        e1, e2 = x1[d - 1], x2[d - 1]
        if e1 == e2:
            overlap += 1
        else:
            if e1 in seen2:
                overlap += 1
            if e2 in seen1:
                overlap += 1
            seen1.add(e1)
            seen2.add(e2)
        agreement = overlap / d
        weighted += weight * agreement
        weight *= p
    # weight is now p^k
    return (1.0 - p) * weighted + agreement * weight


def rbo_distance(x1: Sequence, x2: Sequence, p: float = DEFAULT_RBO_P) -> float:
    return 1.0 - rbo(x1, x2, p)


# -- per-subreddit evolution series ----------------------------------------------


@dataclass
class EvolutionSeries:
    subreddit: str
    kind: str  # "vocabulary" | "user"
    points: list[tuple[str, str, float]] = field(default_factory=list)  # (m, m+1, distance)

    def distances(self) -> list[float]:
        return [d for _, _, d in self.points]


def evolution_series(
    subreddit: str,
    rankings_by_month: Mapping[str, Mapping[StateId, NeighborRanking]],
    kind: str,
    p: float = DEFAULT_RBO_P,
) -> EvolutionSeries:
    """RBO distance between the subreddit's neighbor rankings of consecutive
    active months.

    Rankings from different months list different StateIds, so they are
    projected onto subreddit names before comparison: r/x in month m and
    r/x in month m+1 are the same neighbor.
    """
    months = sorted(
        month
        for month, ranks in rankings_by_month.items()
        if StateId(subreddit, month) in ranks
    )
    if len(months) < 2:
        raise ValueError(f"{subreddit!r} needs >= 2 active months, has {len(months)}")
    series = EvolutionSeries(subreddit=subreddit, kind=kind)
    for m1, m2 in zip(months, months[1:]):
        r1 = rankings_by_month[m1][StateId(subreddit, m1)]
        r2 = rankings_by_month[m2][StateId(subreddit, m2)]
        names1 = [sid.subreddit for sid in r1.ordered]
        names2 = [sid.subreddit for sid in r2.ordered]
        if not names1 or not names2:
            continue  # single-state cohort has no neighbors to compare
        series.points.append((m1, m2, 1.0 - rbo(names1, names2, p)))
    return series


# -- two-sample KS test -----------------------------------------------------------


@dataclass
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int


def ks_two_sample(sample1: Sequence[float], sample2: Sequence[float]) -> KsResult:
    """Exact ECDF sup-difference with the asymptotic two-sided p-value.

    p = Q(sqrt(n1 n2 / (n1 + n2)) * D) where Q is the Kolmogorov survival
    function Q(x) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2).
    """
    if len(sample1) == 0 or len(sample2) == 0:
        raise ValueError("ks_two_sample requires nonempty samples")
    a = np.sort(np.asarray(sample1, dtype=np.float64))
    b = np.sort(np.asarray(sample2, dtype=np.float64))
    n1, n2 = len(a), len(b)
    grid = np.concatenate([a, b])
    cdf1 = np.searchsorted(a, grid, side="right") / n1
    cdf2 = np.searchsorted(b, grid, side="right") / n2
    d = float(np.max(np.abs(cdf1 - cdf2)))
    en = math.sqrt(n1 * n2 / (n1 + n2))
    return KsResult(statistic=d, p_value=_kolmogorov_sf(en * d), n1=n1, n2=n2)


def _kolmogorov_sf(x: float) -> float:
    if x <= 0.0:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * x * x)
        total += -term if j % 2 == 0 else term
        if term < 1e-18:
            break
    return min(1.0, max(0.0, 2.0 * total))

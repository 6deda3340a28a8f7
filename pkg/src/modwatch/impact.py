"""Behavioral impact of joining/intervention events.

Control users are matched to treatment users by locality-sensitive hashing
over monthly participation vectors (random hyperplane signatures), with
every collision set re-ranked by exact euclidean distance; metric series
are aligned on the event month (offset 0).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusStore
from .lexicon import CommentScorer
from .months import add_months

DEFAULT_TABLES = 16
DEFAULT_HYPERPLANES = 12

HATE_INCIDENCE = "hate_incidence"
PROBLEMATIC_PARTICIPATION = "problematic_participation"


def participation_vectors(store: CorpusStore, month: str) -> dict[str, dict[str, int]]:
    """user -> (subreddit -> comment count) for one month; deleted-account
    comments carry no identity and are skipped."""
    vectors: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for c in store.comments:
        if c.month == month and not c.author_deleted:
            vectors[c.author][c.subreddit] += 1
    return {u: dict(v) for u, v in vectors.items()}


@dataclass
class MatchResult:
    matches: dict[str, str]  # treatment user -> control user
    exact_fallbacks: list[str]  # treatment users with no bucket collisions


def lsh_match_controls(
    treatment: dict[str, dict[str, int]],
    candidates: dict[str, dict[str, int]],
    tables: int = DEFAULT_TABLES,
    hyperplanes: int = DEFAULT_HYPERPLANES,
    seed: int = 0,
) -> MatchResult:
    """Match each treatment user to its (approximate) nearest candidate.

    Candidates colliding with the treatment user in any table's signature
    are re-ranked by exact euclidean distance, so the winner is never
    farther than the closest collision. An empty collision set falls back
    to an exact scan over all candidates, reported per user.
    """
    if not candidates:
        raise ValueError("no candidate users to match against")

    dims = sorted({s for vec in treatment.values() for s in vec}
                  | {s for vec in candidates.values() for s in vec})
    dim_pos = {s: i for i, s in enumerate(dims)}
    d = max(1, len(dims))

    def densify(users: dict[str, dict[str, int]]) -> tuple[list[str], np.ndarray]:
        names = sorted(users)
        mat = np.zeros((len(names), d), dtype=np.float64)
        for row, name in enumerate(names):
            for sub, count in users[name].items():
                mat[row, dim_pos[sub]] = count
        return names, mat

    t_names, t_mat = densify(treatment)
    c_names, c_mat = densify(candidates)

    rng = np.random.default_rng(seed)
    planes = rng.standard_normal((tables, hyperplanes, d))

    def signatures(mat: np.ndarray) -> np.ndarray:
        # (n, tables) integer signatures from the sign pattern per table
        bits = np.einsum("thd,nd->nth", planes, mat) >= 0.0
        weights = 1 << np.arange(hyperplanes)
        return (bits * weights).sum(axis=2)

    t_sig = signatures(t_mat)
    c_sig = signatures(c_mat)

    buckets: list[dict[int, list[int]]] = []
    for t in range(tables):
        table: dict[int, list[int]] = defaultdict(list)
        for j, sig in enumerate(c_sig[:, t]):
            table[int(sig)].append(j)
        buckets.append(table)

    matches: dict[str, str] = {}
    fallbacks: list[str] = []
    for i, name in enumerate(t_names):
        collided: set[int] = set()
        for t in range(tables):
            collided.update(buckets[t].get(int(t_sig[i, t]), ()))
        pool = sorted(collided)
        if not pool:
            fallbacks.append(name)
            pool = list(range(len(c_names)))
        dists = np.sqrt(((c_mat[pool] - t_mat[i]) ** 2).sum(axis=1))
        best = min(zip(dists, (c_names[j] for j in pool)))
        matches[name] = best[1]
    return MatchResult(matches=matches, exact_fallbacks=fallbacks)


def exact_nearest(
    treatment: dict[str, dict[str, int]], candidates: dict[str, dict[str, int]]
) -> dict[str, str]:
    """Brute-force nearest candidate per treatment user (oracle for tests)."""
    if not candidates:
        raise ValueError("no candidate users to match against")
    dims = sorted({s for vec in treatment.values() for s in vec}
                  | {s for vec in candidates.values() for s in vec})
    dim_pos = {s: i for i, s in enumerate(dims)}

    def dense(vec: dict[str, int]) -> np.ndarray:
        out = np.zeros(max(1, len(dims)))
        for sub, count in vec.items():
            out[dim_pos[sub]] = count
        return out

    c_names = sorted(candidates)
    c_mat = np.stack([dense(candidates[n]) for n in c_names])
    out = {}
    for name in sorted(treatment):
        v = dense(treatment[name])
        dists = np.sqrt(((c_mat - v) ** 2).sum(axis=1))
        out[name] = min(zip(dists, c_names))[1]
    return out


@dataclass
class EventSeries:
    metric: str
    window: int  # offsets -window..+window
    treatment: dict[int, float] = field(default_factory=dict)
    control: dict[int, float] = field(default_factory=dict)
    truncated: bool = False


def event_series(
    store: CorpusStore,
    user_events: dict[str, str],  # treatment user -> event month
    controls: dict[str, str],  # treatment user -> control user
    metric: str,
    window: int,
    scorer: CommentScorer | None = None,
    threshold: float = 0.5,
    problem_subreddits: set[str] | None = None,
) -> EventSeries:
    """Mean per-user metric value at each month offset around the event.

    hate_incidence is the fraction of a user's comments that month scoring
    at or above the threshold; problematic_participation is the fraction
    landing in eventually-intervened communities. Users inactive at an
    offset month do not contribute to that offset.
    """
    if metric == HATE_INCIDENCE:
        if scorer is None:
            raise ValueError("hate_incidence needs a comment scorer")
    elif metric == PROBLEMATIC_PARTICIPATION:
        if problem_subreddits is None:
            problem_subreddits = store.intervened_subreddits()
    else:
        raise ValueError(f"unknown metric {metric!r}")

    by_user_month: dict[tuple[str, str], list] = defaultdict(list)
    for c in store.comments:
        if not c.author_deleted:
            by_user_month[(c.author, c.month)].append(c)

    def value(user: str, month: str) -> float | None:
        comments = by_user_month.get((user, month))
        if not comments:
            return None
        if metric == HATE_INCIDENCE:
            hits = sum(1 for c in comments if scorer.score(c.body) >= threshold)
        else:
            hits = sum(1 for c in comments if c.subreddit in problem_subreddits)
        return hits / len(comments)

    series = EventSeries(metric=metric, window=window)
    for offset in range(-window, window + 1):
        for group, users in (("treatment", user_events), ("control", controls)):
            values = []
            for t_user, anchor in user_events.items():
                user = t_user if group == "treatment" else controls.get(t_user)
                if user is None:
                    continue
                month = add_months(anchor, offset)
                if not (store.window_start <= month <= store.window_end):
                    series.truncated = True
                    continue
                v = value(user, month)
                if v is not None:
                    values.append(v)
            mean = float(np.mean(values)) if values else 0.0
            if group == "treatment":
                series.treatment[offset] = mean
            else:
                series.control[offset] = mean
    return series

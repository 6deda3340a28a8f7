"""Glue between the corpus store and the vector/distance layers.

Builds both vector kinds once against the immutable store and serves
neighbor rankings and per-community evolution series from caches. This is
what the CLI stages, the review service, and batch analyses share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import CorpusStore, StateId, StateIndex, build_states, sample_comments
from .distance import (
    DEFAULT_RBO_P,
    EvolutionSeries,
    KsResult,
    NeighborRanking,
    cohort_rankings,
    evolution_series,
    ks_two_sample,
)
from .months import month_range
from .vectors import (
    TokenCorpus,
    active_user_vectors,
    activity_vectors,
    build_state_documents,
    build_token_corpus,
    lifespan_documents,
    state_active_users,
    tfidf_vector,
    vocabulary_vectors,
)

VECTOR_KINDS = ("vocabulary", "user")


class EvolutionAnalysis:
    """Vectors and rankings for one corpus, computed lazily and cached."""

    def __init__(
        self,
        store: CorpusStore,
        sample_fraction: float = 1.0,
        sample_seed: int = 0,
        rbo_p: float = DEFAULT_RBO_P,
    ):
        self.store = store
        self.states: StateIndex = build_states(store)
        self.sample_fraction = sample_fraction
        self.sample_seed = sample_seed
        self.rbo_p = rbo_p
        self._documents: dict[StateId, list[str]] | None = None
        self._token_corpus: TokenCorpus | None = None
        self._vocab: dict[StateId, dict[str, float]] | None = None
        self._user: dict[StateId, dict[StateId, float]] | None = None
        self._excluded_states: list[StateId] = []
        self._rankings: dict[str, dict[str, dict[StateId, NeighborRanking]]] = {}

    # -- vectors ---------------------------------------------------------------

    def documents(self) -> dict[StateId, list[str]]:
        if self._documents is None:
            sampled = sample_comments(self.store, self.sample_fraction, self.sample_seed)
            self._documents = build_state_documents(self.store, self.states, sampled)
        return self._documents

    def token_corpus(self) -> TokenCorpus:
        if self._token_corpus is None:
            self._token_corpus = build_token_corpus(self.documents(), self.store.window_end)
        return self._token_corpus

    def vocab_vectors(self) -> dict[StateId, dict[str, float]]:
        if self._vocab is None:
            self._vocab = vocabulary_vectors(self.documents(), self.token_corpus())
        return self._vocab

    def user_vectors(self) -> dict[StateId, dict[StateId, float]]:
        if self._user is None:
            self._user, self._excluded_states = active_user_vectors(
                state_active_users(self.states)
            )
        return self._user

    def excluded_states(self) -> list[StateId]:
        self.user_vectors()
        return list(self._excluded_states)

    def vectors_of_kind(self, kind: str) -> dict[StateId, dict]:
        if kind == "vocabulary":
            return self.vocab_vectors()
        if kind == "user":
            return self.user_vectors()
        raise ValueError(f"unknown vector kind {kind!r}")

    # -- rankings and series ------------------------------------------------------

    def rankings_by_month(self, kind: str) -> dict[str, dict[StateId, NeighborRanking]]:
        if kind not in self._rankings:
            vectors = self.vectors_of_kind(kind)
            by_month: dict[str, dict[StateId, dict]] = {}
            for sid, vec in vectors.items():
                by_month.setdefault(sid.month, {})[sid] = vec
            self._rankings[kind] = {
                month: cohort_rankings(cohort, month)
                for month, cohort in sorted(by_month.items())
            }
        return self._rankings[kind]

    def series(self, subreddit: str, kind: str, p: float | None = None) -> EvolutionSeries:
        return evolution_series(
            subreddit, self.rankings_by_month(kind), kind, p if p is not None else self.rbo_p
        )

    def all_series(self, kind: str, p: float | None = None) -> list[EvolutionSeries]:
        out = []
        for sub in self.states.subreddits():
            months = [
                m for m in self.states.active_months(sub)
                if StateId(sub, m) in self.vectors_of_kind(kind)
            ]
            if len(months) >= 2:
                out.append(self.series(sub, kind, p))
        return out

    # -- control matching inputs ----------------------------------------------------

    def lifespan_vocab_vectors(self) -> dict[str, dict[str, float]]:
        corpus = self.token_corpus()
        return {
            sub: tfidf_vector(tokens, corpus)
            for sub, tokens in lifespan_documents(self.documents()).items()
        }

    def comment_activity_vectors(self) -> dict[str, dict[str, int]]:
        return activity_vectors(self.store, self.states)

    # -- persistence: sorted sparse sidecars per month ----------------------------------

    def save_vectors(self, directory: str | Path) -> None:
        """One JSON sidecar per (kind, month): sorted sparse pairs.

        Format "modwatch.vectors.v1": {format, kind, month, logical_length,
        states: {subreddit: [[key, weight], ...sorted by key]}}.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        vocab = self.vocab_vectors()
        user = self.user_vectors()
        n_tokens = len(self.token_corpus().doc_frequency)
        n_states = len(self.user_vectors())
        for kind, vectors, length in (
            ("vocabulary", vocab, n_tokens),
            ("user", user, n_states),
        ):
            by_month: dict[str, dict[str, list]] = {}
            for sid, vec in vectors.items():
                pairs = sorted(
                    (k if isinstance(k, str) else f"{k.subreddit}/{k.month}", round(v, 12))
                    for k, v in vec.items()
                )
                by_month.setdefault(sid.month, {})[sid.subreddit] = [list(p) for p in pairs]
            for month, states in by_month.items():
                payload = {
                    "format": "modwatch.vectors.v1",
                    "kind": kind,
                    "month": month,
                    "logical_length": length,
                    "states": states,
                }
                path = directory / f"{kind}-{month}.json"
                path.write_text(json.dumps(payload, sort_keys=True))


@dataclass
class KsSummary:
    kind: str
    groups: tuple[str, str]
    result: KsResult

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "groups": list(self.groups),
            "statistic": self.result.statistic,
            "p_value": self.result.p_value,
            "n1": self.result.n1,
            "n2": self.result.n2,
        }


def pooled_distances(
    analysis: EvolutionAnalysis, kind: str, members: set[str], p: float | None = None
) -> list[float]:
    """All consecutive-month RBO distances of the member communities."""
    out: list[float] = []
    for series in analysis.all_series(kind, p):
        if series.subreddit in members:
            out.extend(series.distances())
    return out


def ks_by_label(
    analysis: EvolutionAnalysis,
    kind: str,
    intervened: set[str],
    p: float | None = None,
) -> KsSummary:
    """KS test of per-pair distances: intervened vs all other communities."""
    everyone = set(analysis.states.subreddits())
    clean = everyone - intervened
    result = ks_two_sample(
        pooled_distances(analysis, kind, intervened, p),
        pooled_distances(analysis, kind, clean, p),
    )
    return KsSummary(kind=kind, groups=("intervened", "clean"), result=result)


def distances_csv_rows(analysis: EvolutionAnalysis, kind: str, p: float | None = None) -> list[tuple]:
    """(subreddit, kind, month_from, month_to, rbo_distance) rows."""
    rows = []
    for series in analysis.all_series(kind, p):
        for m1, m2, dist in series.points:
            rows.append((series.subreddit, kind, m1, m2, dist))
    return rows


def subreddit_month_span(store: CorpusStore) -> list[str]:
    return month_range(store.window_start, store.window_end)

"""Fixed-length per-state vectors.

Two kinds per community state: TF-IDF vocabulary weights over the token
corpus, and active-user overlap fractions against every other state. Both
are stored sparsely; the logical length lives in the corpus metadata.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import CorpusStore, StateId, StateIndex
from .months import month_range
from .text import DEFAULT_STOPWORDS, tokenize


@dataclass
class TokenCorpus:
    """Document frequencies over all state-documents dated <= as_of.

    The as_of cutoff is the leakage clock: tokens first seen after it do
    not exist as far as this corpus is concerned.
    """

    doc_frequency: dict[str, int]
    n_documents: int
    as_of: str

    @property
    def tokens(self) -> list[str]:
        return sorted(self.doc_frequency)

    def __contains__(self, token: str) -> bool:
        return token in self.doc_frequency


def build_token_corpus(
    documents: Mapping[StateId, Sequence[str]], as_of: str
) -> TokenCorpus:
    """Collect the unique-token corpus from state documents dated <= as_of."""
    df: Counter[str] = Counter()
    n_docs = 0
    for sid, tokens in documents.items():
        if sid.month > as_of:
            continue
        n_docs += 1
        df.update(set(tokens))
    if n_docs == 0:
        raise ValueError("no documents at or before as_of")
    return TokenCorpus(doc_frequency=dict(df), n_documents=n_docs, as_of=as_of)


def tfidf_vector(tokens: Sequence[str], corpus: TokenCorpus) -> dict[str, float]:
    """weight(t) = tf(t) * ln(|D| / df(t)); tokens outside the corpus drop out."""
    tf = Counter(tokens)
    weights: dict[str, float] = {}
    for token, count in tf.items():
        df = corpus.doc_frequency.get(token)
        if df is None:
            continue  # future token relative to as_of
        w = count * math.log(corpus.n_documents / df)
        if w != 0.0:
            weights[token] = w
    return weights


def build_state_documents(
    store: CorpusStore,
    states: StateIndex,
    sampled_ids: set[str],
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
) -> dict[StateId, list[str]]:
    """One token list per state: sampled comment bodies plus post titles.

    Comments honor the vocabulary sample; posts are not sampled (titles are
    short and few relative to comments).
    """
    docs: dict[StateId, list[str]] = {}
    for sid in states:
        sl = states[sid]
        tokens: list[str] = []
        for c in sl.comments:
            if c.id in sampled_ids and c.body:
                tokens.extend(tokenize(c.body, stopwords))
        for p in sl.posts:
            if p.title:
                tokens.extend(tokenize(p.title, stopwords))
        docs[sid] = tokens
    return docs


def vocabulary_vectors(
    documents: Mapping[StateId, Sequence[str]], corpus: TokenCorpus
) -> dict[StateId, dict[str, float]]:
    """TF-IDF vector for every document visible at the corpus cutoff."""
    return {
        sid: tfidf_vector(tokens, corpus)
        for sid, tokens in documents.items()
        if sid.month <= corpus.as_of
    }


def active_user_vectors(
    active_users: Mapping[StateId, set[str]],
) -> tuple[dict[StateId, dict[StateId, float]], list[StateId]]:
    """Overlap fraction vectors: entry(i, j) = |A_i & A_j| / |A_i|.

    Computed against all states. States with zero active users cannot be
    normalized and are excluded; they come back in the second element.
    Note the matrix is not symmetric: entry(i, j) == entry(j, i) only when
    |A_i| == |A_j|.
    """
    excluded = sorted(sid for sid, users in active_users.items() if not users)
    included = {sid: users for sid, users in active_users.items() if users}

    # invert: user -> states, then count pairwise co-occurrences
    by_user: dict[str, list[StateId]] = defaultdict(list)
    for sid, users in included.items():
        for user in users:
            by_user[user].append(sid)

    inter: dict[StateId, Counter[StateId]] = {sid: Counter() for sid in included}
    for sids in by_user.values():
        for i in sids:
            inter[i].update(sids)

    vectors: dict[StateId, dict[StateId, float]] = {}
    for sid, counts in inter.items():
        size = len(included[sid])
        vectors[sid] = {other: c / size for other, c in counts.items()}
    return vectors, excluded


def state_active_users(states: StateIndex) -> dict[StateId, set[str]]:
    return {sid: states[sid].active_users() for sid in states}


def activity_vector(
    states: StateIndex, subreddit: str, window: Iterable[str]
) -> dict[str, int]:
    """Comments per month over the corpus window; quiet months are 0."""
    if subreddit not in states.subreddits():
        raise ValueError(f"unknown subreddit: {subreddit!r}")
    counts = {month: 0 for month in window}
    for month in states.active_months(subreddit):
        counts[month] = len(states[StateId(subreddit, month)].comments)
    return counts


def activity_vectors(store: CorpusStore, states: StateIndex) -> dict[str, dict[str, int]]:
    window = month_range(store.window_start, store.window_end)
    return {sub: activity_vector(states, sub, window) for sub in states.subreddits()}


def lifespan_documents(
    documents: Mapping[StateId, Sequence[str]], as_of: str | None = None
) -> dict[str, list[str]]:
    """Aggregate each subreddit's state documents into one lifetime document
    (used for control matching), optionally cut off at as_of."""
    merged: dict[str, list[str]] = defaultdict(list)
    for sid, tokens in documents.items():
        if as_of is not None and sid.month > as_of:
            continue
        merged[sid.subreddit].extend(tokens)
    return dict(merged)

"""Quarterly feature extraction with a hard leakage gate.

Every value in a row is computable from records timestamped at or before
the quarter's cutoff month. Interventions, mentions, and cross-community
activity dated later simply do not exist for that row, so appending future
data to the store can never change an already-extracted row.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import CorpusStore, StateId, StateIndex, build_states, sample_comments
from .distance import cosine_similarity
from .lexicon import CommentScorer, Lexicon, lexicon_scores
from .text import tokenize
from .vectors import TokenCorpus, build_state_documents, tfidf_vector

LABEL_INTERVENED = "intervened"
LABEL_CLEAN = "clean"

AUTOMODERATOR = "AutoModerator"

_MOMENTS = ("mean", "std", "median", "p90")


@dataclass(frozen=True)
class QuarterSpan:
    subreddit: str
    index: int  # 1..4
    months: tuple[str, ...]  # the active months covered, ordered

    @property
    def start_month(self) -> str:
        return self.months[0]

    @property
    def end_month(self) -> str:
        return self.months[-1]

    @property
    def cutoff(self) -> str:
        return self.months[-1]


def split_quarters(subreddit: str, active_months: Sequence[str]) -> list[QuarterSpan]:
    """Partition the active lifespan into four ordered spans whose sizes
    differ by at most one; remainder months go to the earliest quarters."""
    months = sorted(active_months)
    n = len(months)
    if n < 4:
        raise ValueError(f"{subreddit!r}: lifespan of {n} months cannot be quartered")
    base, rem = divmod(n, 4)
    sizes = [base + 1] * rem + [base] * (4 - rem)
    spans = []
    pos = 0
    for i, size in enumerate(sizes, start=1):
        spans.append(QuarterSpan(subreddit=subreddit, index=i, months=tuple(months[pos : pos + size])))
        pos += size
    return spans


@dataclass
class FeatureRow:
    subreddit: str
    quarter: QuarterSpan
    values: dict[str, float]
    label: str
    flags: list[str] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        """Canonical serialization used for leakage byte-equality checks."""
        payload = {
            "subreddit": self.subreddit,
            "quarter": {
                "index": self.quarter.index,
                "months": list(self.quarter.months),
            },
            "values": {k: self.values[k] for k in sorted(self.values)},
            "label": self.label,
            "flags": sorted(self.flags),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _moments(values: Sequence[float]) -> dict[str, float]:
    if len(values) == 0:
        return {m: 0.0 for m in _MOMENTS}
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std()),
        "median": float(np.median(arr)),
        "p90": float(np.percentile(arr, 90)),
    }


def feature_schema(lexicon: Lexicon) -> list[str]:
    """The fixed, ordered key set every row carries."""
    names: list[str] = [
        "community_active_commenters",
        "community_posts",
        "community_comments",
    ]
    names += [f"community_comments_per_post_{m}" for m in _MOMENTS]
    names += [f"community_comment_score_{m}" for m in _MOMENTS]
    names += ["community_user_growth_pct"]
    names += [f"community_controversial_per_post_{m}" for m in _MOMENTS]
    names += ["community_controversial_comments", "community_gilded_comments"]
    names += ["moderators_count", "moderators_incoming", "moderators_outgoing"]
    names += [f"moderators_comment_score_{m}" for m in _MOMENTS]
    names += [
        "moderators_automoderator_comments",
        "moderators_removed_posts",
        "moderators_removed_post_score_total",
        "users_mean_active_months",
        "users_deleted_account_comments",
        "structural_unique_connections",
        "structural_total_connections",
        "structural_users_banned_connected",
        "mentions_community",
        "mentions_community_negative",
        "mentions_news",
        "mentions_news_negative",
    ]
    names += [f"language_lex_{cat}" for cat in lexicon.category_names()]
    names += ["language_toxic_comments", "vocabulary_banned_cosine_mean"]
    return names


class FeatureContext:
    """Immutable extraction context: the store plus caches shared across rows.

    Caches are derived once from the store; rows extracted against the same
    context (or a context over the same records) are identical.
    """

    def __init__(
        self,
        store: CorpusStore,
        lexicon: Lexicon,
        scorer: CommentScorer,
        *,
        states: StateIndex | None = None,
        toxicity_threshold: float = 0.5,
        sample_fraction: float = 1.0,
        sample_seed: int = 0,
    ):
        self.store = store
        self.states = states if states is not None else build_states(store)
        self.lexicon = lexicon
        self.scorer = scorer
        self.toxicity_threshold = toxicity_threshold
        self.sample_fraction = sample_fraction
        self.sample_seed = sample_seed
        self.has_moderator_roster = bool(store.moderators)

        self._user_activity: dict[str, dict[str, set[str]]] | None = None
        self._state_docs: dict[StateId, list[str]] | None = None
        self._df_by_month: dict[str, tuple[int, dict[str, int]]] | None = None
        self._language_tokens: dict[StateId, list[str]] = {}
        self._toxic_counts: dict[StateId, int] = {}
        self._roster: dict[str, list] | None = None
        self._lifetime_vec_cache: dict[tuple[str, str], dict[str, float]] = {}

    # -- caches ------------------------------------------------------------

    def user_activity(self) -> dict[str, dict[str, set[str]]]:
        """user -> subreddit -> set of active months (whole corpus)."""
        if self._user_activity is None:
            idx: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
            for c in self.store.comments:
                if not c.author_deleted:
                    idx[c.author][c.subreddit].add(c.month)
            for p in self.store.posts:
                idx[p.author][p.subreddit].add(p.month)
            self._user_activity = {u: dict(subs) for u, subs in idx.items()}
        return self._user_activity

    def state_documents(self) -> dict[StateId, list[str]]:
        if self._state_docs is None:
            sampled = sample_comments(self.store, self.sample_fraction, self.sample_seed)
            self._state_docs = build_state_documents(self.store, self.states, sampled)
        return self._state_docs

    def token_corpus_at(self, cutoff: str) -> TokenCorpus:
        """TokenCorpus restricted to state documents dated <= cutoff, built
        from per-month cumulative document frequencies."""
        if self._df_by_month is None:
            docs = self.state_documents()
            by_month: dict[str, list[set[str]]] = defaultdict(list)
            for sid, tokens in docs.items():
                by_month[sid.month].append(set(tokens))
            running: dict[str, int] = {}
            n_docs = 0
            snapshots: dict[str, tuple[int, dict[str, int]]] = {}
            for month in sorted(by_month):
                for token_set in by_month[month]:
                    n_docs += 1
                    for t in token_set:
                        running[t] = running.get(t, 0) + 1
                snapshots[month] = (n_docs, dict(running))
            self._df_by_month = snapshots
        eligible = [m for m in self._df_by_month if m <= cutoff]
        if not eligible:
            raise ValueError(f"no documents at or before {cutoff}")
        n_docs, df = self._df_by_month[max(eligible)]
        return TokenCorpus(doc_frequency=df, n_documents=n_docs, as_of=cutoff)

    def language_tokens(self, sid: StateId) -> list[str]:
        """Full (unsampled) comment-body tokens for one state."""
        if sid not in self._language_tokens:
            sl = self.states.get(sid)
            tokens: list[str] = []
            if sl is not None:
                for c in sl.comments:
                    if c.body:
                        tokens.extend(tokenize(c.body))
            self._language_tokens[sid] = tokens
        return self._language_tokens[sid]

    def toxic_comment_count(self, sid: StateId) -> int:
        if sid not in self._toxic_counts:
            sl = self.states.get(sid)
            count = 0
            if sl is not None:
                count = sum(
                    1 for c in sl.comments if self.scorer.score(c.body) >= self.toxicity_threshold
                )
            self._toxic_counts[sid] = count
        return self._toxic_counts[sid]

    def roster(self, subreddit: str) -> list:
        if self._roster is None:
            roster: dict[str, list] = defaultdict(list)
            for m in self.store.moderators:
                roster[m.subreddit].append(m)
            self._roster = dict(roster)
        return self._roster.get(subreddit, [])

    def lifetime_vector_at(self, subreddit: str, cutoff: str) -> dict[str, float]:
        """TF-IDF vector of a community's aggregate document up to cutoff,
        weighted by the cutoff-restricted token corpus (cached per pair)."""
        key = (subreddit, cutoff)
        if key not in self._lifetime_vec_cache:
            docs = self.state_documents()
            tokens: list[str] = []
            for month in self.states.active_months(subreddit):
                if month <= cutoff:
                    tokens.extend(docs.get(StateId(subreddit, month), []))
            self._lifetime_vec_cache[key] = tfidf_vector(tokens, self.token_corpus_at(cutoff))
        return self._lifetime_vec_cache[key]

    def banned_before(self, cutoff: str, exclude: str) -> list[str]:
        """Communities with an intervention dated <= cutoff, except `exclude`.

        The subject community is excluded so a row can never see its own
        (label-defining) intervention through the banned set.
        """
        out = set()
        for iv in self.store.interventions:
            if iv.date <= cutoff and iv.subreddit != exclude:
                out.add(iv.subreddit)
        return sorted(out)


def banned_connected_users(
    ctx: FeatureContext, users: set[str], cutoff: str, exclude: str
) -> int:
    """How many of `users` were active, at months <= cutoff, in a community
    already intervened by the cutoff. Monotone in the cutoff for a fixed
    user set, because the banned set and visible activity only grow."""
    banned = set(ctx.banned_before(cutoff, exclude))
    if not banned:
        return 0
    activity = ctx.user_activity()
    count = 0
    for user in users:
        subs = activity.get(user, {})
        for sub in subs:
            if sub in banned and sub != exclude and any(m <= cutoff for m in subs[sub]):
                count += 1
                break
    return count


def extract_features(ctx: FeatureContext, subreddit: str, quarter: QuarterSpan) -> FeatureRow:
    """One leakage-gated FeatureRow for (subreddit, quarter).

    Activity features read the quarter's own months; structural, mention,
    and vocabulary features read everything up to (and including) the
    cutoff; nothing reads past it.
    """
    cutoff = quarter.cutoff
    schema = feature_schema(ctx.lexicon)
    values = {name: 0.0 for name in schema}
    flags: list[str] = []
    label = LABEL_INTERVENED if ctx.store.intervention_month(subreddit) else LABEL_CLEAN

    slices = [
        ctx.states[StateId(subreddit, m)]
        for m in quarter.months
        if StateId(subreddit, m) in ctx.states
    ]
    comments = [c for sl in slices for c in sl.comments]
    posts = [p for sl in slices for p in sl.posts]
    if not comments and not posts:
        flags.append("empty_quarter")
        return FeatureRow(subreddit=subreddit, quarter=quarter, values=values, label=label, flags=flags)

    # -- community ---------------------------------------------------------
    commenters = {c.author for c in comments if not c.author_deleted}
    values["community_active_commenters"] = float(len(commenters))
    values["community_posts"] = float(len(posts))
    values["community_comments"] = float(len(comments))

    by_parent: dict[str, int] = defaultdict(int)
    controversial_by_parent: dict[str, int] = defaultdict(int)
    for c in comments:
        if c.parent_id:
            by_parent[c.parent_id] += 1
            if c.controversial:
                controversial_by_parent[c.parent_id] += 1
    comments_per_post = [float(by_parent.get(p.id, 0)) for p in posts]
    for m, v in _moments(comments_per_post).items():
        values[f"community_comments_per_post_{m}"] = v
    for m, v in _moments([float(c.score) for c in comments]).items():
        values[f"community_comment_score_{m}"] = v

    month_users = [
        ctx.states[StateId(subreddit, m)].active_users() if StateId(subreddit, m) in ctx.states else set()
        for m in quarter.months
    ]
    first, last = len(month_users[0]), len(month_users[-1])
    values["community_user_growth_pct"] = (last - first) / max(1, first)

    controversial_per_post = [float(controversial_by_parent.get(p.id, 0)) for p in posts]
    for m, v in _moments(controversial_per_post).items():
        values[f"community_controversial_per_post_{m}"] = v
    values["community_controversial_comments"] = float(sum(1 for c in comments if c.controversial))
    values["community_gilded_comments"] = float(sum(1 for c in comments if c.gilded))

    # -- moderators ----------------------------------------------------------
    roster = ctx.roster(subreddit)
    if not ctx.has_moderator_roster:
        flags.append("no_moderator_roster")
    q_start, q_end = quarter.start_month, quarter.end_month

    def active_at(mod, month: str) -> bool:
        return mod.start_month <= month and (mod.end_month is None or month <= mod.end_month)

    values["moderators_count"] = float(
        sum(1 for m in roster if m.start_month <= q_end and (m.end_month is None or m.end_month >= q_start))
    )
    values["moderators_incoming"] = float(sum(1 for m in roster if q_start <= m.start_month <= q_end))
    values["moderators_outgoing"] = float(
        sum(1 for m in roster if m.end_month is not None and q_start <= m.end_month <= q_end)
    )
    mod_users = {m.user for m in roster}
    mod_scores = [
        float(c.score)
        for c in comments
        if c.author in mod_users and any(m.user == c.author and active_at(m, c.month) for m in roster)
    ]
    for m, v in _moments(mod_scores).items():
        values[f"moderators_comment_score_{m}"] = v
    values["moderators_automoderator_comments"] = float(
        sum(1 for c in comments if c.author == AUTOMODERATOR)
    )
    removed = [p for p in posts if p.removed]
    values["moderators_removed_posts"] = float(len(removed))
    values["moderators_removed_post_score_total"] = float(sum(p.score for p in removed))

    # -- users ----------------------------------------------------------------
    active = {u for us in month_users for u in us}
    if active:
        activity = ctx.user_activity()
        spans = [
            float(sum(1 for m in activity.get(u, {}).get(subreddit, ()) if m <= cutoff))
            for u in active
        ]
        values["users_mean_active_months"] = float(np.mean(spans))
    values["users_deleted_account_comments"] = float(sum(1 for c in comments if c.author_deleted))

    # -- structural (gated on cutoff) ------------------------------------------
    activity = ctx.user_activity()
    connected: set[str] = set()
    total_connections = 0
    for u in sorted(active):
        for sub, months in activity.get(u, {}).items():
            if sub != subreddit and any(m <= cutoff for m in months):
                connected.add(sub)
                total_connections += 1
    values["structural_unique_connections"] = float(len(connected))
    values["structural_total_connections"] = float(total_connections)
    values["structural_users_banned_connected"] = float(
        banned_connected_users(ctx, active, cutoff, exclude=subreddit)
    )

    # -- mentions (cumulative to cutoff) ----------------------------------------
    for m in ctx.store.mentions:
        if m.target_subreddit != subreddit or m.date > cutoff:
            continue
        if m.source == "community":
            values["mentions_community"] += 1.0
            if m.sentiment == "negative":
                values["mentions_community_negative"] += 1.0
        else:
            values["mentions_news"] += 1.0
            if m.sentiment == "negative":
                values["mentions_news_negative"] += 1.0

    # -- language ------------------------------------------------------------
    lang_tokens: list[str] = []
    toxic = 0
    for m in quarter.months:
        sid = StateId(subreddit, m)
        lang_tokens.extend(ctx.language_tokens(sid))
        toxic += ctx.toxic_comment_count(sid)
    for cat, share in lexicon_scores(lang_tokens, ctx.lexicon).items():
        values[f"language_lex_{cat}"] = share
    values["language_toxic_comments"] = float(toxic)

    # -- vocabulary similarity to banned communities -------------------------------
    banned = ctx.banned_before(cutoff, exclude=subreddit)
    if banned:
        corpus = ctx.token_corpus_at(cutoff)
        docs = ctx.state_documents()
        subject_tokens: list[str] = []
        for m in quarter.months:
            subject_tokens.extend(docs.get(StateId(subreddit, m), []))
        subject_vec = tfidf_vector(subject_tokens, corpus)
        sims = []
        for other in banned:
            other_vec = ctx.lifetime_vector_at(other, cutoff)
            if subject_vec and other_vec:
                sims.append(cosine_similarity(subject_vec, other_vec))
            else:
                sims.append(0.0)
        values["vocabulary_banned_cosine_mean"] = float(np.mean(sims))

    assert set(values) == set(schema)
    return FeatureRow(subreddit=subreddit, quarter=quarter, values=values, label=label, flags=flags)


def toxicity_rate(ctx: FeatureContext, sid: StateId, threshold: float | None = None) -> float:
    """Fraction of a state's comments scoring at or above the threshold."""
    sl = ctx.states.get(sid)
    if sl is None or not sl.comments:
        return 0.0
    thr = ctx.toxicity_threshold if threshold is None else threshold
    hits = sum(1 for c in sl.comments if ctx.scorer.score(c.body) >= thr)
    return hits / len(sl.comments)


@dataclass
class FeatureDataset:
    rows: list[FeatureRow]
    excluded: dict[str, str]  # subreddit -> reason
    schema: list[str]


def build_feature_dataset(ctx: FeatureContext) -> FeatureDataset:
    """Quarter rows for every community with a quarterable lifespan."""
    rows: list[FeatureRow] = []
    excluded: dict[str, str] = {}
    for subreddit in ctx.states.subreddits():
        months = ctx.states.active_months(subreddit)
        try:
            quarters = split_quarters(subreddit, months)
        except ValueError:
            excluded[subreddit] = f"lifespan<{4}"
            continue
        for q in quarters:
            rows.append(extract_features(ctx, subreddit, q))
    return FeatureDataset(rows=rows, excluded=excluded, schema=feature_schema(ctx.lexicon))


def single_month_row(ctx: FeatureContext, subreddit: str, month: str) -> FeatureRow:
    """The quarter schema computed over a single month (cutoff = month).

    Used by the monthly flagging loop, where candidates are scored on one
    month of evidence; the schema intentionally matches quarter rows.
    """
    span = QuarterSpan(subreddit=subreddit, index=1, months=(month,))
    return extract_features(ctx, subreddit, span)

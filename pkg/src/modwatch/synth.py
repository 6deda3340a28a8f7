"""Synthetic corpora with planted, recoverable signals.

Desk-scale stand-ins for platform-scale data: a planted-signal corpus
(problematic communities get banned-community user inflow, an elevated
toxic-lexicon rate, and negative mentions), a policy-shift stream (a new
violation family with a distinct signal appears mid-stream), and an LSH
matching fixture with near-duplicate control twins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CorpusStore
from .months import add_months, index_month, month_index, timestamp_of_month

TOXIC_WORDS = ("hate", "idiot", "stupid", "scum", "trash", "moron", "disgust", "vermin")

SIGNAL_FEATURES = (
    "structural_users_banned_connected",
    "language_toxic_comments",
    "mentions_community_negative",
)


def _word_pool(rng: np.random.Generator) -> tuple[list[str], list[list[str]], list[str]]:
    """(common words, topic clusters, fringe words shared with banned seeds)."""
    common = [f"word{i}" for i in range(400)]
    topics = [[f"topic{t}word{i}" for i in range(70)] for t in range(12)]
    fringe = [f"fringe{i}" for i in range(60)]
    return common, topics, fringe


@dataclass
class SynthCorpus:
    window_start: str
    window_end: str
    comments: list[dict] = field(default_factory=list)
    posts: list[dict] = field(default_factory=list)
    interventions: list[dict] = field(default_factory=list)
    mentions: list[dict] = field(default_factory=list)
    moderators: list[dict] = field(default_factory=list)
    problematic: list[str] = field(default_factory=list)
    clean: list[str] = field(default_factory=list)
    seed_banned: list[str] = field(default_factory=list)
    families: dict[str, str] = field(default_factory=dict)  # subreddit -> family tag
    intervention_month: dict[str, str] = field(default_factory=dict)

    def to_store(self) -> CorpusStore:
        store = CorpusStore(self.window_start, self.window_end)
        for kind in ("comments", "posts", "interventions", "mentions", "moderators"):
            lines = (json.dumps(rec) for rec in getattr(self, kind))
            store.ingest_events(lines, kind)
        return store

    def write_ndjson(self, directory: str | Path) -> dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {}
        for kind in ("comments", "posts", "interventions", "mentions", "moderators"):
            path = directory / f"{kind}.ndjson"
            with open(path, "w", encoding="utf-8") as fh:
                for rec in getattr(self, kind):
                    fh.write(json.dumps(rec) + "\n")
            paths[kind] = path
        return paths


class _Builder:
    def __init__(self, corpus: SynthCorpus, rng: np.random.Generator):
        self.c = corpus
        self.rng = rng
        self._n = 0

    def _ts(self, month: str) -> int:
        return timestamp_of_month(month) + int(self.rng.integers(0, 27 * 86400))

    def state(
        self,
        subreddit: str,
        month: str,
        users: list[str],
        words: list[str],
        weights: np.ndarray,
        n_comments: int,
        toxic_prob: float = 0.0,
        n_posts: int | None = None,
    ) -> None:
        """Emit one month of activity: posts with titles, threaded comments."""
        rng = self.rng
        n_posts = int(rng.integers(8, 16)) if n_posts is None else n_posts
        post_ids = []
        for i in range(n_posts):
            pid = f"p{self._n}"
            self._n += 1
            post_ids.append(pid)
            title = " ".join(rng.choice(words, size=int(rng.integers(4, 8)), p=weights))
            self.c.posts.append(
                {
                    "id": pid,
                    "author": users[int(rng.integers(0, len(users)))],
                    "subreddit": subreddit,
                    "created": self._ts(month),
                    "title": title,
                    "score": int(rng.integers(0, 40)),
                    "removed": bool(rng.random() < 0.02),
                }
            )
        token_lens = rng.integers(6, 12, size=n_comments)
        toxic_flags = rng.random(n_comments) < toxic_prob
        for i in range(n_comments):
            body_words = list(rng.choice(words, size=int(token_lens[i]), p=weights))
            if toxic_flags[i]:
                body_words.extend(
                    rng.choice(TOXIC_WORDS, size=int(rng.integers(1, 3)))
                )
            cid = f"c{self._n}"
            self._n += 1
            self.c.comments.append(
                {
                    "id": cid,
                    "author": users[int(rng.integers(0, len(users)))],
                    "subreddit": subreddit,
                    "created": self._ts(month),
                    "body": " ".join(body_words),
                    "score": int(rng.normal(5, 4)),
                    "parent_id": post_ids[int(rng.integers(0, len(post_ids)))]
                    if rng.random() < 0.6
                    else None,
                    "removed": False,
                    "author_deleted": bool(rng.random() < 0.01),
                    "gilded": bool(rng.random() < 0.01),
                    "controversial": bool(rng.random() < 0.03),
                }
            )
        if rng.random() < 0.8:
            self.c.comments.append(
                {
                    "id": f"c{self._n}",
                    "author": "AutoModerator",
                    "subreddit": subreddit,
                    "created": self._ts(month),
                    "body": "post removed keep discussion civil",
                    "score": 1,
                    "parent_id": None,
                    "removed": False,
                    "author_deleted": False,
                    "gilded": False,
                    "controversial": False,
                }
            )
        self._n += 1

    def mention(self, subreddit: str, month: str, source: str, negative: bool) -> None:
        self.c.mentions.append(
            {
                "target_subreddit": subreddit,
                "source": source,
                "date": month,
                "sentiment": "negative" if negative else "other",
            }
        )


def _mixture(
    rng: np.random.Generator,
    common: list[str],
    topic_words: list[str],
    extra: list[str] | None = None,
    extra_share: float = 0.0,
) -> tuple[list[str], np.ndarray]:
    words = list(common) + list(topic_words) + (list(extra) if extra else [])
    w = np.concatenate(
        [
            np.full(len(common), (1.0 - 0.45 - extra_share) / len(common)),
            np.full(len(topic_words), 0.45 / len(topic_words)),
            np.full(len(extra), extra_share / len(extra)) if extra else np.zeros(0),
        ]
    )
    return words, w / w.sum()


def generate_planted_corpus(
    seed: int = 7,
    n_subreddits: int = 60,
    n_problematic: int = 10,
    n_months: int = 24,
    window_start: str = "2018-01",
    comments_per_state: tuple[int, int] = (110, 170),
    iv_start_index: int | None = None,
) -> SynthCorpus:
    """The acceptance corpus: n_subreddits over n_months, with n_problematic
    communities carrying the three planted signals (banned-user inflow,
    toxic-lexicon rate, negative community mentions) plus churning users
    and rotating vocabulary; four short-lived pre-banned seed communities
    supply the migration sources."""
    rng = np.random.default_rng(seed)
    window_end = add_months(window_start, n_months - 1)
    corpus = SynthCorpus(window_start=window_start, window_end=window_end)
    b = _Builder(corpus, rng)
    common, topics, fringe = _word_pool(rng)
    months = [add_months(window_start, i) for i in range(n_months)]

    # Pre-banned seed communities: active 3 months, intervened right after.
    seed_pools: list[list[str]] = []
    for k in range(4):
        name = f"seedban{k}"
        corpus.seed_banned.append(name)
        pool = [f"banned{k}u{i}" for i in range(120)]
        seed_pools.append(pool)
        live = months[k : k + 3]
        for month in live:
            words, w = _mixture(rng, common, topics[k % len(topics)], fringe, 0.25)
            b.state(name, month, pool, words, w, int(rng.integers(60, 90)), toxic_prob=0.4)
        iv_month = months[k + 3]
        corpus.interventions.append({"subreddit": name, "action": "ban", "date": iv_month})
        corpus.intervention_month[name] = iv_month
        corpus.families[name] = "seed"

    # User dynamics are deliberately symmetric between groups: 35 stable
    # members, 20 one-month churners, and two visitor waves of 6..18 users
    # per month. The only differences are planted: problematic communities
    # draw their visitors from banned-community pools (clean ones from the
    # shared drifter pool), rotate vocabulary and part of their core, speak
    # toxic-lexicon words, and attract negative mentions.
    n_clean = n_subreddits - n_problematic
    drifters = [f"drifter{i}" for i in range(480)]

    def visitor_wave(pool: list[str]) -> list[str]:
        return list(rng.choice(pool, size=int(rng.integers(6, 19)), replace=False))

    def churners(name: str, m_idx: int) -> list[str]:
        return [f"{name}m{m_idx}u{i}" for i in range(20)]

    for s in range(n_clean):
        name = f"clean{s:02d}"
        corpus.clean.append(name)
        corpus.families[name] = "clean"
        stable = [f"{name}u{i}" for i in range(35)]
        topic = topics[s % len(topics)]
        for m_idx, month in enumerate(months):
            users = stable + churners(name, m_idx) + visitor_wave(drifters) + visitor_wave(drifters)
            words, w = _mixture(rng, common, topic)
            b.state(name, month, users, words, w,
                    int(rng.integers(*comments_per_state)), toxic_prob=0.01)
            if rng.random() < 0.25:
                b.mention(name, month, "community", negative=rng.random() < 0.15)
            if rng.random() < 0.10:
                b.mention(name, month, "news", negative=rng.random() < 0.15)
        corpus.moderators.append({"subreddit": name, "user": stable[0], "start_month": months[0]})
        corpus.moderators.append({"subreddit": name, "user": stable[1], "start_month": months[0]})

    if iv_start_index is None:
        iv_start_index = max(8, (2 * n_months) // 3)
    iv_indices = np.linspace(iv_start_index, n_months - 1, n_problematic).astype(int)
    for s in range(n_problematic):
        name = f"problem{s:02d}"
        corpus.problematic.append(name)
        corpus.families[name] = "problematic"
        iv_idx = int(iv_indices[s])
        iv_month = months[iv_idx]
        corpus.interventions.append(
            {"subreddit": name, "action": "ban" if s % 2 == 0 else "quarantine", "date": iv_month}
        )
        corpus.intervention_month[name] = iv_month
        assigned = [topics[(3 * s + j) % len(topics)] for j in range(3)]
        stable = [f"{name}u{i}" for i in range(35)]
        generation = 0
        for m_idx, month in enumerate(months[: iv_idx + 1]):
            if m_idx > 0 and m_idx % 6 == 0:
                # partial core turnover: the community's user base never settles
                generation += 1
                stable = stable[14:] + [f"{name}g{generation}u{i}" for i in range(14)]
            live_pools = [
                pool for k, pool in enumerate(seed_pools)
                if corpus.intervention_month[f"seedban{k}"] <= month
            ]
            users = stable + churners(name, m_idx)
            for _ in range(2):
                source = live_pools[int(rng.integers(0, len(live_pools)))] if live_pools else drifters
                users += visitor_wave(source)
            toxic_share = 0.25 + 0.15 * (m_idx / n_months)
            topic = assigned[m_idx % 3]
            words, w = _mixture(rng, common, topic, fringe, 0.12)
            b.state(name, month, users, words, w,
                    int(rng.integers(*comments_per_state)), toxic_prob=toxic_share)
            for _ in range(int(rng.poisson(3.0))):
                b.mention(name, month, "community", negative=True)
            for _ in range(int(rng.poisson(0.5))):
                b.mention(name, month, "community", negative=False)
            for _ in range(int(rng.poisson(1.0))):
                b.mention(name, month, "news", negative=True)
        corpus.moderators.append({"subreddit": name, "user": f"{name}u0", "start_month": months[0]})
        corpus.moderators.append({"subreddit": name, "user": f"{name}u1", "start_month": months[0]})
    return corpus


def generate_policy_shift_stream(
    seed: int = 11,
    n_clean: int = 20,
    n_family_a: int = 8,
    n_family_b: int = 10,
    n_months: int = 30,
    window_start: str = "2018-01",
) -> SynthCorpus:
    """Continuous-learning stream with a mid-stream policy shift.

    Family A violates with a toxic-language signal and is intervened
    throughout; family B appears from month ~9 with a distinct signal
    (negative news mentions, no toxicity, no banned inflow) the initial
    model has never seen, so early family-B interventions arrive as false
    negatives until feedback teaches the signal.
    """
    rng = np.random.default_rng(seed)
    window_end = add_months(window_start, n_months - 1)
    corpus = SynthCorpus(window_start=window_start, window_end=window_end)
    b = _Builder(corpus, rng)
    common, topics, _ = _word_pool(rng)
    months = [add_months(window_start, i) for i in range(n_months)]

    for s in range(n_clean):
        name = f"calm{s:02d}"
        corpus.clean.append(name)
        corpus.families[name] = "clean"
        users = [f"{name}u{i}" for i in range(30)]
        topic = topics[s % len(topics)]
        for month in months:
            words, w = _mixture(rng, common, topic)
            b.state(name, month, users, words, w, int(rng.integers(40, 70)), toxic_prob=0.01)
            if rng.random() < 0.1:
                b.mention(name, month, "news", negative=False)

    # two family-A interventions land inside a 6-month initial window so the
    # first training set has both classes with enough minority rows
    a_iv = np.concatenate([[3, 5], np.linspace(8, n_months - 3, n_family_a - 2).astype(int)])
    for s in range(n_family_a):
        name = f"fama{s:02d}"
        corpus.families[name] = "family_a"
        iv_idx = int(a_iv[s])
        iv_month = months[iv_idx]
        corpus.problematic.append(name)
        corpus.interventions.append({"subreddit": name, "action": "ban", "date": iv_month})
        corpus.intervention_month[name] = iv_month
        users = [f"{name}u{i}" for i in range(30)]
        topic = topics[(s + 3) % len(topics)]
        for month in months[: iv_idx + 1]:
            words, w = _mixture(rng, common, topic)
            b.state(name, month, users, words, w, int(rng.integers(40, 70)), toxic_prob=0.45)

    first_birth = 8
    for s in range(n_family_b):
        name = f"famb{s:02d}"
        corpus.families[name] = "family_b"
        birth = first_birth + 2 * s
        iv_idx = min(birth + 4, n_months - 1)
        iv_month = months[iv_idx]
        corpus.problematic.append(name)
        corpus.interventions.append({"subreddit": name, "action": "quarantine", "date": iv_month})
        corpus.intervention_month[name] = iv_month
        users = [f"{name}u{i}" for i in range(30)]
        topic = topics[(s + 7) % len(topics)]
        for month in months[birth : iv_idx + 1]:
            words, w = _mixture(rng, common, topic)
            b.state(name, month, users, words, w, int(rng.integers(40, 70)), toxic_prob=0.01)
            for _ in range(int(rng.poisson(6.0)) + 2):
                b.mention(name, month, "news", negative=True)
    return corpus


@dataclass
class LshFixture:
    treatment: dict[str, dict[str, int]]
    candidates: dict[str, dict[str, int]]
    twin_of: dict[str, str]  # treatment user -> planted nearest candidate


def generate_lsh_fixture(
    seed: int = 0,
    n_treatment: int = 200,
    n_distractors: int = 300,
    n_dims: int = 30,
) -> LshFixture:
    """Participation vectors where every treatment user has a near-duplicate
    candidate twin among random distractors."""
    rng = np.random.default_rng(seed)
    subs = [f"s{i:02d}" for i in range(n_dims)]

    def random_vector() -> dict[str, int]:
        k = int(rng.integers(3, 9))
        picks = rng.choice(n_dims, size=k, replace=False)
        return {subs[i]: int(rng.integers(1, 25)) for i in picks}

    treatment, candidates, twin_of = {}, {}, {}
    for i in range(n_treatment):
        name = f"t{i:03d}"
        vec = random_vector()
        treatment[name] = vec
        twin = dict(vec)
        bump = sorted(twin)[int(rng.integers(0, len(twin)))]
        twin[bump] = twin[bump] + 1  # euclidean distance exactly 1
        twin_name = f"ctwin{i:03d}"
        candidates[twin_name] = twin
        twin_of[name] = twin_name
    for j in range(n_distractors):
        candidates[f"crand{j:03d}"] = random_vector()
    return LshFixture(treatment=treatment, candidates=candidates, twin_of=twin_of)

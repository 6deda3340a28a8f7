"""Event-log ingestion and the monthly community-state store.

Input is newline-delimited JSON, one record per line, snake_case field
names, timestamps as integer epoch seconds (UTC) and dates as "YYYY-MM".
The store is write-once: ingest everything, then treat it as immutable.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple

from .months import month_of_timestamp, month_range, parse_month

BAN = "ban"
QUARANTINE = "quarantine"

RECORD_KINDS = ("comments", "posts", "interventions", "mentions", "moderators")


class StateId(NamedTuple):
    """One community in one calendar month; the unit of analysis."""

    subreddit: str
    month: str


@dataclass(frozen=True)
class CommentRecord:
    id: str
    author: str
    subreddit: str
    created: int
    body: str
    score: int = 0
    parent_id: str | None = None
    removed: bool = False
    author_deleted: bool = False
    gilded: bool = False
    controversial: bool = False

    @property
    def month(self) -> str:
        return month_of_timestamp(self.created)


@dataclass(frozen=True)
class PostRecord:
    id: str
    author: str
    subreddit: str
    created: int
    title: str
    score: int = 0
    removed: bool = False

    @property
    def month(self) -> str:
        return month_of_timestamp(self.created)


@dataclass(frozen=True)
class InterventionRecord:
    subreddit: str
    action: str  # "ban" | "quarantine"
    date: str  # YYYY-MM


@dataclass(frozen=True)
class MentionRecord:
    target_subreddit: str
    source: str  # "community" | "news"
    date: str
    sentiment: str  # "negative" | "other"


@dataclass(frozen=True)
class ModeratorRecord:
    subreddit: str
    user: str
    start_month: str
    end_month: str | None = None


@dataclass
class IngestReport:
    accepted: int = 0
    skipped: int = 0
    reasons: Counter = field(default_factory=Counter)

    def skip(self, reason: str) -> None:
        self.skipped += 1
        self.reasons[reason] += 1

    def merged(self, other: "IngestReport") -> "IngestReport":
        out = IngestReport(self.accepted + other.accepted, self.skipped + other.skipped)
        out.reasons = self.reasons + other.reasons
        return out


class CorpusError(Exception):
    """Fatal ingestion/corpus problem (unreadable stream, unknown kind, ...)."""


def _require(raw: dict, *names: str) -> list:
    missing = [n for n in names if n not in raw]
    if missing:
        raise KeyError(missing[0])
    return [raw[n] for n in names]


def _parse_comment(raw: dict) -> CommentRecord:
    rid, author, sub, created, body = _require(raw, "id", "author", "subreddit", "created", "body")
    return CommentRecord(
        id=str(rid),
        author=str(author),
        subreddit=str(sub),
        created=int(created),
        body=str(body),
        score=int(raw.get("score", 0)),
        parent_id=raw.get("parent_id"),
        removed=bool(raw.get("removed", False)),
        author_deleted=bool(raw.get("author_deleted", False)),
        gilded=bool(raw.get("gilded", False)),
        controversial=bool(raw.get("controversial", False)),
    )


def _parse_post(raw: dict) -> PostRecord:
    rid, author, sub, created, title = _require(raw, "id", "author", "subreddit", "created", "title")
    return PostRecord(
        id=str(rid),
        author=str(author),
        subreddit=str(sub),
        created=int(created),
        title=str(title),
        score=int(raw.get("score", 0)),
        removed=bool(raw.get("removed", False)),
    )


def _parse_intervention(raw: dict) -> InterventionRecord:
    sub, action, date = _require(raw, "subreddit", "action", "date")
    if action not in (BAN, QUARANTINE):
        raise ValueError(f"unknown action {action!r}")
    return InterventionRecord(subreddit=str(sub), action=action, date=parse_month(date))


def _parse_mention(raw: dict) -> MentionRecord:
    sub, source, date = _require(raw, "target_subreddit", "source", "date")
    if source not in ("community", "news"):
        raise ValueError(f"unknown mention source {source!r}")
    sentiment = raw.get("sentiment", "other")
    if sentiment not in ("negative", "other"):
        raise ValueError(f"unknown sentiment {sentiment!r}")
    return MentionRecord(target_subreddit=str(sub), source=source, date=parse_month(date), sentiment=sentiment)


def _parse_moderator(raw: dict) -> ModeratorRecord:
    sub, user, start = _require(raw, "subreddit", "user", "start_month")
    end = raw.get("end_month")
    return ModeratorRecord(
        subreddit=str(sub),
        user=str(user),
        start_month=parse_month(start),
        end_month=parse_month(end) if end else None,
    )


_PARSERS = {
    "comments": _parse_comment,
    "posts": _parse_post,
    "interventions": _parse_intervention,
    "mentions": _parse_mention,
    "moderators": _parse_moderator,
}


class CorpusStore:
    """All ingested records for one corpus window, indexed by (subreddit, month).

    Single-writer: call ingest_* during setup, then only read. Duplicate ids
    keep the first record seen.
    """

    def __init__(self, window_start: str, window_end: str):
        self.window_start = parse_month(window_start)
        self.window_end = parse_month(window_end)
        self.comments: list[CommentRecord] = []
        self.posts: list[PostRecord] = []
        self.interventions: list[InterventionRecord] = []
        self.mentions: list[MentionRecord] = []
        self.moderators: list[ModeratorRecord] = []
        self._comment_ids: set[str] = set()
        self._post_ids: set[str] = set()
        self._intervention_keys: set[tuple[str, str]] = set()
        self._banned: set[str] = set()

    # -- ingestion ---------------------------------------------------------

    def ingest_events(self, stream: IO[str] | Iterable[str], kind: str) -> IngestReport:
        """Ingest one NDJSON stream. Malformed lines are skipped and counted;
        an unreadable stream or unknown kind is fatal."""
        if kind not in _PARSERS:
            raise CorpusError(f"unknown record kind: {kind!r}")
        parser = _PARSERS[kind]
        report = IngestReport()
        try:
            lines = iter(stream)
        except TypeError as exc:
            raise CorpusError(f"unreadable stream: {exc}") from exc
        while True:
            try:
                line = next(lines)
            except StopIteration:
                break
            except (UnicodeDecodeError, OSError) as exc:
                raise CorpusError(f"unreadable stream: {exc}") from exc
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError:
                report.skip("parse")
                continue
            if not isinstance(raw, dict):
                report.skip("parse")
                continue
            try:
                record = parser(raw)
            except (KeyError, ValueError, TypeError):
                report.skip("schema")
                continue
            self._add(record, kind, report)
        return report

    def ingest_file(self, path: str | Path, kind: str) -> IngestReport:
        try:
            with open(path, "r", encoding="utf-8", errors="strict") as fh:
                return self.ingest_events(fh, kind)
        except (OSError, UnicodeDecodeError) as exc:
            raise CorpusError(f"unreadable stream {path}: {exc}") from exc

    def _in_window(self, month: str) -> bool:
        return self.window_start <= month <= self.window_end

    def _add(self, record, kind: str, report: IngestReport) -> None:
        if kind == "comments":
            if record.id in self._comment_ids:
                report.skip("duplicate")
                return
            if not self._in_window(record.month):
                report.skip("window")
                return
            if record.body == "" and not record.removed:
                report.skip("invalid")
                return
            self._comment_ids.add(record.id)
            self.comments.append(record)
        elif kind == "posts":
            if record.id in self._post_ids:
                report.skip("duplicate")
                return
            if not self._in_window(record.month):
                report.skip("window")
                return
            self._post_ids.add(record.id)
            self.posts.append(record)
        elif kind == "interventions":
            key = (record.subreddit, record.action)
            if record.action == BAN and record.subreddit in self._banned:
                report.skip("duplicate")
                return
            if key in self._intervention_keys:
                report.skip("duplicate")
                return
            quarantine_after_ban = (
                record.action == QUARANTINE
                and any(
                    iv.subreddit == record.subreddit and iv.action == BAN and iv.date < record.date
                    for iv in self.interventions
                )
            )
            ban_before_quarantine = (
                record.action == BAN
                and any(
                    iv.subreddit == record.subreddit and iv.action == QUARANTINE and iv.date > record.date
                    for iv in self.interventions
                )
            )
            if quarantine_after_ban or ban_before_quarantine:
                report.skip("invalid")
                return
            self._intervention_keys.add(key)
            if record.action == BAN:
                self._banned.add(record.subreddit)
            self.interventions.append(record)
        elif kind == "mentions":
            if not self._in_window(record.date):
                report.skip("window")
                return
            self.mentions.append(record)
        elif kind == "moderators":
            self.moderators.append(record)
        report.accepted += 1

    # -- derived views -----------------------------------------------------

    def intervention_month(self, subreddit: str) -> str | None:
        """Earliest ban/quarantine month, or None. Bans and quarantines are
        treated as the same (positive) label."""
        dates = [iv.date for iv in self.interventions if iv.subreddit == subreddit]
        return min(dates) if dates else None

    def intervened_subreddits(self) -> set[str]:
        return {iv.subreddit for iv in self.interventions}

    def subreddits(self) -> set[str]:
        return {c.subreddit for c in self.comments} | {p.subreddit for p in self.posts}

    # -- persistence -------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        buckets = {
            "comments": self.comments,
            "posts": self.posts,
            "interventions": self.interventions,
            "mentions": self.mentions,
            "moderators": self.moderators,
        }
        for kind, records in buckets.items():
            with open(directory / f"{kind}.ndjson", "w", encoding="utf-8") as fh:
                for rec in records:
                    fh.write(json.dumps(asdict(rec), sort_keys=True) + "\n")
        meta = {
            "format": "modwatch.corpus.v1",
            "window_start": self.window_start,
            "window_end": self.window_end,
            "counts": {k: len(v) for k, v in buckets.items()},
        }
        (directory / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))

    @classmethod
    def load(cls, directory: str | Path) -> "CorpusStore":
        directory = Path(directory)
        meta = json.loads((directory / "meta.json").read_text())
        store = cls(meta["window_start"], meta["window_end"])
        for kind in RECORD_KINDS:
            path = directory / f"{kind}.ndjson"
            if path.exists():
                store.ingest_file(path, kind)
        return store


# -- sampling ---------------------------------------------------------------


def _unit_hash(comment_id: str, seed: int) -> float:
    """Deterministic uniform draw in [0, 1) keyed by (id, seed)."""
    digest = hashlib.blake2b(
        f"{seed}:{comment_id}".encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") / 2**64


def sample_comments(store: CorpusStore, fraction: float, seed: int) -> set[str]:
    """Hash-based Bernoulli sample of comment ids.

    Each comment is included independently with probability `fraction` as a
    pure function of (id, seed), so samples are reproducible under
    incremental ingestion and nested across fractions for a fixed seed.
    Used only for vocabulary documents; user vectors see the full data.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    if fraction == 1.0:
        return set(store._comment_ids)
    if fraction == 0.0:
        return set()
    return {c.id for c in store.comments if _unit_hash(c.id, seed) < fraction}


# -- monthly states -----------------------------------------------------------


@dataclass
class StateSlice:
    """All activity of one subreddit in one month."""

    id: StateId
    comments: list[CommentRecord] = field(default_factory=list)
    posts: list[PostRecord] = field(default_factory=list)

    def active_users(self) -> set[str]:
        """Authors with any posting or commenting activity. Records flagged
        author_deleted carry no usable identity and are excluded."""
        users = {c.author for c in self.comments if not c.author_deleted}
        users |= {p.author for p in self.posts}
        return users


class StateIndex:
    """Partition of all corpus activity into (subreddit, month) states."""

    def __init__(self, states: dict[StateId, StateSlice]):
        self.states = states
        self._months_by_subreddit: dict[str, list[str]] = defaultdict(list)
        for sid in sorted(states):
            self._months_by_subreddit[sid.subreddit].append(sid.month)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[StateId]:
        return iter(self.states)

    def __contains__(self, sid: StateId) -> bool:
        return sid in self.states

    def __getitem__(self, sid: StateId) -> StateSlice:
        return self.states[sid]

    def get(self, sid: StateId) -> StateSlice | None:
        return self.states.get(sid)

    def active_months(self, subreddit: str) -> list[str]:
        return list(self._months_by_subreddit.get(subreddit, []))

    def month_cohort(self, month: str) -> list[StateId]:
        return sorted(sid for sid in self.states if sid.month == month)

    def subreddits(self) -> list[str]:
        return sorted(self._months_by_subreddit)


def build_states(store: CorpusStore) -> StateIndex:
    """Index every (subreddit, month) with at least one post or comment.

    States are disjoint and jointly cover all accepted activity.
    """
    states: dict[StateId, StateSlice] = {}

    def slot(sub: str, month: str) -> StateSlice:
        sid = StateId(sub, month)
        if sid not in states:
            states[sid] = StateSlice(id=sid)
        return states[sid]

    for c in store.comments:
        slot(c.subreddit, c.month).comments.append(c)
    for p in store.posts:
        slot(p.subreddit, p.month).posts.append(p)
    return StateIndex(states)


# -- control matching ---------------------------------------------------------


def match_controls(
    intervened: Iterable[str],
    candidates: Iterable[str],
    vocab_vectors: dict[str, dict[str, float]],
    activity_vectors: dict[str, dict[str, float]],
) -> dict[str, str]:
    """Match each intervened community to its most similar candidate.

    Score = 0.5 * cos(vocabulary vectors) + 0.5 * cos(activity vectors);
    ties break to the lexicographically smallest candidate name. A zero
    vector on either side contributes 0 to the score instead of erroring,
    so inactive candidates simply cannot win. A candidate may be matched
    to several intervened communities.
    """
    from .distance import cosine_similarity

    candidates = sorted(set(candidates))
    if not candidates:
        raise ValueError("empty candidate set")

    def safe_cos(a: dict, b: dict) -> float:
        if not a or not b or not any(a.values()) or not any(b.values()):
            return 0.0
        return cosine_similarity(a, b)

    matches: dict[str, str] = {}
    for target in sorted(set(intervened)):
        best_name, best_score = None, -1.0
        for cand in candidates:
            score = 0.5 * safe_cos(vocab_vectors[target], vocab_vectors[cand]) + 0.5 * safe_cos(
                activity_vectors[target], activity_vectors[cand]
            )
            if score > best_score:
                best_name, best_score = cand, score
        matches[target] = best_name
    return matches


def activity_months(store: CorpusStore) -> list[str]:
    """All months of the configured corpus window."""
    return month_range(store.window_start, store.window_end)

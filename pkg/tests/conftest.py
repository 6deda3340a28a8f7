import json

import pytest

from modwatch.corpus import CorpusStore
from modwatch.features import FeatureContext, build_feature_dataset
from modwatch.lexicon import LexiconIndicatorScorer, demo_lexicon
from modwatch.months import timestamp_of_month


def comment(
    cid,
    author="alice",
    subreddit="sub",
    month="2018-03",
    body="some words here",
    day=5,
    **kw,
):
    rec = {
        "id": cid,
        "author": author,
        "subreddit": subreddit,
        "created": timestamp_of_month(month, day),
        "body": body,
        "score": kw.pop("score", 1),
        "parent_id": kw.pop("parent_id", None),
        "removed": kw.pop("removed", False),
        "author_deleted": kw.pop("author_deleted", False),
        "gilded": kw.pop("gilded", False),
        "controversial": kw.pop("controversial", False),
    }
    rec.update(kw)
    return rec


def post(pid, author="alice", subreddit="sub", month="2018-03", title="a post title", day=3, **kw):
    rec = {
        "id": pid,
        "author": author,
        "subreddit": subreddit,
        "created": timestamp_of_month(month, day),
        "title": title,
        "score": kw.pop("score", 1),
        "removed": kw.pop("removed", False),
    }
    rec.update(kw)
    return rec


def ndjson(records):
    return [json.dumps(r) for r in records]


def make_store(comments=(), posts=(), interventions=(), mentions=(), moderators=(),
               window=("2018-01", "2019-12")):
    store = CorpusStore(*window)
    if comments:
        store.ingest_events(ndjson(comments), "comments")
    if posts:
        store.ingest_events(ndjson(posts), "posts")
    if interventions:
        store.ingest_events(ndjson(interventions), "interventions")
    if mentions:
        store.ingest_events(ndjson(mentions), "mentions")
    if moderators:
        store.ingest_events(ndjson(moderators), "moderators")
    return store


def make_context(store, **kw):
    lex = demo_lexicon()
    return FeatureContext(store, lex, LexiconIndicatorScorer(lex), **kw)


@pytest.fixture(scope="session")
def planted():
    """The acceptance corpus: built once per test session."""
    from modwatch.synth import generate_planted_corpus

    corpus = generate_planted_corpus(seed=7)
    store = corpus.to_store()
    ctx = make_context(store)
    dataset = build_feature_dataset(ctx)
    return {"corpus": corpus, "store": store, "ctx": ctx, "dataset": dataset}


@pytest.fixture(scope="session")
def policy_stream():
    from modwatch.synth import generate_policy_shift_stream

    corpus = generate_policy_shift_stream(seed=11)
    store = corpus.to_store()
    ctx = make_context(store)
    return {"corpus": corpus, "store": store, "ctx": ctx}

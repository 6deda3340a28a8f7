import json

import pytest

from modwatch.corpus import CorpusStore, CorpusError, StateId, build_states, match_controls, sample_comments
from modwatch.text import tokenize
from modwatch.stem import stem

from conftest import comment, make_store, ndjson, post


# -- ingestion -----------------------------------------------------------------


def test_ingest_clean_lines():
    store = CorpusStore("2018-01", "2018-12")
    report = store.ingest_events(
        ndjson([comment("c1"), comment("c2", author="bob"), comment("c3")]), "comments"
    )
    assert (report.accepted, report.skipped) == (3, 0)


def test_ingest_dedupes_by_id_keeping_first():
    store = CorpusStore("2018-01", "2018-12")
    report = store.ingest_events(
        ndjson([comment("c1", body="first body"), comment("c1", body="second body")]),
        "comments",
    )
    assert (report.accepted, report.skipped) == (1, 1)
    assert report.reasons["duplicate"] == 1
    assert store.comments[0].body == "first body"


def test_ingest_counts_malformed_lines():
    lines = ndjson([comment(f"c{i}") for i in range(4)])
    lines.insert(2, "{not valid json")
    store = CorpusStore("2018-01", "2018-12")
    report = store.ingest_events(lines, "comments")
    assert (report.accepted, report.skipped) == (4, 1)
    assert report.reasons["parse"] == 1


def test_ingest_unknown_kind_fatal():
    store = CorpusStore("2018-01", "2018-12")
    with pytest.raises(CorpusError):
        store.ingest_events([], "votes")


def test_ingest_window_and_schema_skips():
    store = CorpusStore("2018-01", "2018-06")
    report = store.ingest_events(
        ndjson([
            comment("c1", month="2018-03"),
            comment("c2", month="2019-03"),  # outside window
            {"id": "c3", "author": "x"},     # missing fields
            comment("c4", body=""),          # empty body, not removed
            comment("c5", body="", removed=True),
        ]),
        "comments",
    )
    assert report.accepted == 2
    assert report.reasons == {"window": 1, "schema": 1, "invalid": 1}


def test_ingest_idempotent():
    records = ndjson([comment("c1"), comment("c2")])
    store = CorpusStore("2018-01", "2018-12")
    store.ingest_events(records, "comments")
    snapshot = [c.id for c in store.comments]
    report = store.ingest_events(records, "comments")
    assert report.accepted == 0
    assert [c.id for c in store.comments] == snapshot


def test_intervention_invariants():
    store = CorpusStore("2018-01", "2019-12")
    report = store.ingest_events(
        ndjson([
            {"subreddit": "a", "action": "ban", "date": "2018-05"},
            {"subreddit": "a", "action": "ban", "date": "2018-07"},   # second ban
            {"subreddit": "b", "action": "quarantine", "date": "2018-02"},
            {"subreddit": "b", "action": "ban", "date": "2018-04"},
        ]),
        "interventions",
    )
    assert report.accepted == 3
    assert report.reasons["duplicate"] == 1
    assert store.intervention_month("a") == "2018-05"
    assert store.intervention_month("b") == "2018-02"  # quarantine <= ban


def test_quarantine_after_ban_rejected():
    store = CorpusStore("2018-01", "2019-12")
    report = store.ingest_events(
        ndjson([
            {"subreddit": "a", "action": "ban", "date": "2018-03"},
            {"subreddit": "a", "action": "quarantine", "date": "2018-06"},
        ]),
        "interventions",
    )
    assert report.accepted == 1
    assert report.reasons["invalid"] == 1


def test_save_load_roundtrip(tmp_path):
    store = make_store(
        comments=[comment("c1"), comment("c2", month="2018-04")],
        posts=[post("p1")],
        interventions=[{"subreddit": "sub", "action": "ban", "date": "2018-06"}],
    )
    store.save(tmp_path / "corpus")
    loaded = CorpusStore.load(tmp_path / "corpus")
    assert [c.id for c in loaded.comments] == ["c1", "c2"]
    assert loaded.intervention_month("sub") == "2018-06"


# -- sampling -------------------------------------------------------------------


def _store_with_n_comments(n):
    return make_store(comments=[comment(f"c{i}", month="2018-03") for i in range(n)])


def test_sample_full_and_empty():
    store = _store_with_n_comments(20)
    assert sample_comments(store, 1.0, 7) == {f"c{i}" for i in range(20)}
    assert sample_comments(store, 0.0, 7) == set()
    with pytest.raises(ValueError):
        sample_comments(store, 1.5, 7)


def test_sample_binomial_bound():
    store = _store_with_n_comments(10_000)
    size = len(sample_comments(store, 0.1, 7))
    # 3 sigma around np = 1000, sigma = sqrt(n p (1-p)) = 30
    assert 910 <= size <= 1090


def test_sample_deterministic_and_nested():
    store = _store_with_n_comments(500)
    s1 = sample_comments(store, 0.2, 3)
    assert s1 == sample_comments(store, 0.2, 3)
    assert s1 <= sample_comments(store, 0.5, 3)
    assert sample_comments(store, 0.2, 4) != s1  # different seed, different sample


# -- tokenize --------------------------------------------------------------------


def test_tokenize_empty_and_stopwords():
    assert tokenize("") == []
    assert tokenize("The THE the") == []


def test_tokenize_stems():
    assert tokenize("cats running quickly") == [stem("cats"), stem("running"), stem("quickly")]
    assert tokenize("cats running quickly") == ["cat", "run", "quickli"]


def test_tokenize_strips_punctuation_and_case():
    assert tokenize("Hello, WORLD!!") == ["hello", "world"]


# -- states ------------------------------------------------------------------------


def test_single_comment_single_state():
    store = make_store(comments=[comment("c1", subreddit="s", month="2019-09")])
    states = build_states(store)
    assert len(states) == 1
    assert StateId("s", "2019-09") in states


def test_states_disjoint_across_months():
    store = make_store(comments=[
        comment("c1", subreddit="s", month="2018-01"),
        comment("c2", subreddit="s", month="2018-02"),
    ])
    states = build_states(store)
    assert len(states) == 2
    assert len(states[StateId("s", "2018-01")].comments) == 1
    assert len(states[StateId("s", "2018-02")].comments) == 1


def test_states_partition_fixture():
    comments = []
    expected = {}
    n = 0
    for sub in ("a", "b", "c"):
        for month in ("2018-01", "2018-02"):
            k = {"a": 2, "b": 3, "c": 1}[sub]
            expected[StateId(sub, month)] = k
            for i in range(k):
                comments.append(comment(f"c{n}", subreddit=sub, month=month))
                n += 1
    store = make_store(comments=comments)
    states = build_states(store)
    assert len(states) == 6
    assert {sid: len(states[sid].comments) for sid in states} == expected
    assert sum(len(states[sid].comments) for sid in states) == len(store.comments)


def test_active_users_include_posters():
    store = make_store(
        comments=[comment("c1", author="carol", subreddit="s")],
        posts=[post("p1", author="dave", subreddit="s")],
    )
    states = build_states(store)
    assert states[StateId("s", "2018-03")].active_users() == {"carol", "dave"}


# -- control matching ------------------------------------------------------------------


def test_match_controls_identical_candidate_wins():
    vocab = {"t": {"a": 1.0, "b": 2.0}, "c1": {"a": 1.0, "b": 2.0}, "c2": {"z": 5.0}}
    act = {"t": {"2018-01": 3.0}, "c1": {"2018-01": 3.0}, "c2": {"2018-02": 9.0}}
    assert match_controls(["t"], ["c1", "c2"], vocab, act) == {"t": "c1"}


def test_match_controls_orthogonal_loses():
    vocab = {"t": {"a": 1.0}, "ident": {"a": 2.0}, "orth": {"b": 1.0}}
    act = {"t": {"m1": 1.0}, "ident": {"m1": 5.0}, "orth": {"m2": 1.0}}
    assert match_controls(["t"], ["orth", "ident"], vocab, act)["t"] == "ident"


def test_match_controls_brute_force_argmax():
    from modwatch.distance import cosine_similarity

    vocab = {
        "t": {"a": 1.0, "b": 1.0},
        "c1": {"a": 1.0, "b": 0.5},
        "c2": {"a": 0.2, "b": 1.0},
        "c3": {"b": 1.0, "c": 1.0},
    }
    act = {
        "t": {"m1": 2.0, "m2": 1.0},
        "c1": {"m1": 1.0, "m2": 1.0},
        "c2": {"m1": 2.0, "m2": 0.5},
        "c3": {"m2": 3.0},
    }
    best = max(
        ("c1", "c2", "c3"),
        key=lambda c: (
            0.5 * cosine_similarity(vocab["t"], vocab[c])
            + 0.5 * cosine_similarity(act["t"], act[c]),
            # max() keeps the first of equal keys; ties are broken
            # lexicographically in the implementation (sorted candidates)
        ),
    )
    assert match_controls(["t"], ["c1", "c2", "c3"], vocab, act)["t"] == best


def test_match_controls_scale_invariant():
    vocab = {"t": {"a": 1.0, "b": 1.0}, "c1": {"a": 3.0, "b": 1.0}, "c2": {"a": 1.0, "b": 3.0}}
    act = {"t": {"m": 1.0}, "c1": {"m": 1.0}, "c2": {"m": 1.0}}
    base = match_controls(["t"], ["c1", "c2"], vocab, act)
    scaled_vocab = {k: {kk: 10.0 * vv for kk, vv in v.items()} for k, v in vocab.items()}
    assert match_controls(["t"], ["c1", "c2"], scaled_vocab, act) == base


def test_match_controls_empty_candidates_error():
    with pytest.raises(ValueError):
        match_controls(["t"], [], {}, {})

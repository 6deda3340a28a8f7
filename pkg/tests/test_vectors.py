import math

import pytest
from hypothesis import given, strategies as st

from modwatch.corpus import StateId, build_states
from modwatch.vectors import (
    TokenCorpus,
    active_user_vectors,
    activity_vector,
    build_token_corpus,
    state_active_users,
    tfidf_vector,
)

from conftest import comment, make_store


def sid(sub, month="2018-01"):
    return StateId(sub, month)


# -- token corpus ---------------------------------------------------------------


def test_single_doc_corpus():
    corpus = build_token_corpus({sid("a"): ["cat"]}, as_of="2018-01")
    assert corpus.doc_frequency == {"cat": 1}
    assert corpus.n_documents == 1


def test_df_counts_documents_not_occurrences():
    docs = {sid("a"): ["cat", "cat", "cat"], sid("b"): ["cat", "dog"]}
    corpus = build_token_corpus(docs, as_of="2018-01")
    assert corpus.doc_frequency["cat"] == 2
    assert corpus.doc_frequency["dog"] == 1


def test_df_matches_brute_force_scan():
    docs = {
        sid("a"): ["x", "y", "x"],
        sid("b"): ["y", "z"],
        sid("c"): ["z", "z", "w"],
        sid("d"): ["x", "w", "q"],
    }
    corpus = build_token_corpus(docs, as_of="2018-01")
    for token in {t for doc in docs.values() for t in doc}:
        brute = sum(1 for doc in docs.values() if token in doc)
        assert corpus.doc_frequency[token] == brute


def test_corpus_respects_as_of():
    docs = {sid("a", "2018-01"): ["old"], sid("a", "2018-05"): ["new"]}
    corpus = build_token_corpus(docs, as_of="2018-03")
    assert "new" not in corpus.doc_frequency
    assert corpus.n_documents == 1
    with pytest.raises(ValueError):
        build_token_corpus(docs, as_of="2017-12")


# -- tf-idf ----------------------------------------------------------------------


def test_token_in_every_document_weighs_zero():
    corpus = TokenCorpus(doc_frequency={"the_topic": 4}, n_documents=4, as_of="2018-01")
    assert tfidf_vector(["the_topic", "the_topic"], corpus) == {}


def test_token_absent_from_doc_weighs_zero():
    corpus = TokenCorpus(doc_frequency={"cat": 1, "dog": 1}, n_documents=4, as_of="2018-01")
    vec = tfidf_vector(["cat"], corpus)
    assert "dog" not in vec


def test_tfidf_formula_direct():
    corpus = TokenCorpus(doc_frequency={"cat": 1}, n_documents=4, as_of="2018-01")
    vec = tfidf_vector(["cat"] * 3, corpus)
    assert vec["cat"] == pytest.approx(3 * math.log(4), abs=1e-12)
    assert vec["cat"] == pytest.approx(4.1589, abs=1e-4)


def test_future_tokens_dropped():
    corpus = TokenCorpus(doc_frequency={"cat": 1}, n_documents=2, as_of="2018-01")
    assert tfidf_vector(["cat", "later_token"], corpus).keys() == {"cat"}


@given(st.integers(min_value=1, max_value=7))
def test_tfidf_repetition_scales_weights(k):
    corpus = TokenCorpus(doc_frequency={"a": 1, "b": 2}, n_documents=5, as_of="2018-01")
    base = tfidf_vector(["a", "b", "b"], corpus)
    scaled = tfidf_vector(["a", "b", "b"] * k, corpus)
    for token, w in base.items():
        assert scaled[token] == pytest.approx(k * w, rel=1e-12)


def test_tfidf_relabeling_permutes_weights():
    corpus = TokenCorpus(doc_frequency={"a": 1, "b": 3}, n_documents=6, as_of="2018-01")
    swapped = TokenCorpus(doc_frequency={"b": 1, "a": 3}, n_documents=6, as_of="2018-01")
    v1 = tfidf_vector(["a", "a", "b"], corpus)
    v2 = tfidf_vector(["b", "b", "a"], swapped)
    assert v1["a"] == v2["b"] and v1["b"] == v2["a"]


# -- active user vectors ------------------------------------------------------------


def test_identical_user_sets_full_overlap():
    vectors, _ = active_user_vectors({sid("a"): {"u1", "u2"}, sid("b"): {"u1", "u2"}})
    assert vectors[sid("a")][sid("b")] == 1.0
    assert vectors[sid("a")][sid("a")] == 1.0  # self entry exactly 1


def test_disjoint_user_sets_zero_overlap():
    vectors, _ = active_user_vectors({sid("a"): {"u1"}, sid("b"): {"u2"}})
    assert vectors[sid("a")].get(sid("b"), 0.0) == 0.0


def test_overlap_set_arithmetic():
    vectors, _ = active_user_vectors({sid("a"): {"u1", "u2"}, sid("b"): {"u2", "u3"}})
    assert vectors[sid("a")][sid("b")] == 0.5
    assert vectors[sid("b")][sid("a")] == 0.5


def test_overlap_asymmetry_when_sizes_differ():
    vectors, _ = active_user_vectors({sid("a"): {"u1", "u2", "u3", "u4"}, sid("b"): {"u1"}})
    assert vectors[sid("a")][sid("b")] == 0.25
    assert vectors[sid("b")][sid("a")] == 1.0


def test_zero_user_state_excluded_and_reported():
    vectors, excluded = active_user_vectors({sid("a"): {"u1"}, sid("empty"): set()})
    assert excluded == [sid("empty")]
    assert sid("empty") not in vectors


def test_dropping_state_preserves_other_overlaps():
    users = {sid("a"): {"u1", "u2"}, sid("b"): {"u2"}, sid("c"): {"u1", "u3"}}
    full, _ = active_user_vectors(users)
    reduced, _ = active_user_vectors({k: v for k, v in users.items() if k != sid("c")})
    assert reduced[sid("a")][sid("b")] == full[sid("a")][sid("b")]


def test_overlaps_in_unit_interval():
    users = {sid(f"s{i}"): {f"u{j}" for j in range(i + 1)} for i in range(5)}
    vectors, _ = active_user_vectors(users)
    for vec in vectors.values():
        assert all(0.0 <= v <= 1.0 for v in vec.values())


def test_matches_brute_force_on_fixture():
    users = {
        sid("a"): {"u1", "u2", "u3"},
        sid("b"): {"u2", "u4"},
        sid("c"): {"u5"},
        sid("d"): {"u1", "u4", "u5", "u6"},
    }
    vectors, _ = active_user_vectors(users)
    for i in users:
        for j in users:
            expected = len(users[i] & users[j]) / len(users[i])
            assert vectors[i].get(j, 0.0) == pytest.approx(expected)


# -- activity vectors ---------------------------------------------------------------


def test_activity_vector_zero_fill_and_counts():
    store = make_store(comments=[
        comment("c1", subreddit="s", month="2018-02"),
        comment("c2", subreddit="s", month="2018-02"),
        comment("c3", subreddit="s", month="2018-04"),
    ], window=("2018-01", "2018-05"))
    states = build_states(store)
    vec = activity_vector(states, "s", ["2018-01", "2018-02", "2018-03", "2018-04", "2018-05"])
    assert vec == {"2018-01": 0, "2018-02": 2, "2018-03": 0, "2018-04": 1, "2018-05": 0}


def test_activity_vector_single_month():
    store = make_store(comments=[comment(f"c{i}", subreddit="s", month="2018-03") for i in range(5)])
    states = build_states(store)
    vec = activity_vector(states, "s", ["2018-02", "2018-03"])
    assert vec == {"2018-02": 0, "2018-03": 5}


def test_activity_vector_unknown_subreddit():
    store = make_store(comments=[comment("c1")])
    states = build_states(store)
    with pytest.raises(ValueError):
        activity_vector(states, "nope", ["2018-01"])


def test_state_active_users_excludes_deleted():
    store = make_store(comments=[
        comment("c1", author="alice"),
        comment("c2", author="ghost", author_deleted=True),
    ])
    states = build_states(store)
    assert state_active_users(states)[StateId("sub", "2018-03")] == {"alice"}

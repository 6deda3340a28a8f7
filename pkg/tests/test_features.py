import numpy as np
import pytest

from modwatch.corpus import StateId
from modwatch.features import (
    FeatureContext,
    QuarterSpan,
    banned_connected_users,
    build_feature_dataset,
    extract_features,
    feature_schema,
    single_month_row,
    split_quarters,
    toxicity_rate,
)
from modwatch.lexicon import ConstantScorer, Lexicon, demo_lexicon, lexicon_scores
from modwatch.months import add_months, month_range
from modwatch.text import tokenize

from conftest import comment, make_context, make_store, post


# -- quarter splitting -----------------------------------------------------------


def months_from(start, n):
    return [add_months(start, i) for i in range(n)]


def test_split_even_lifespan():
    spans = split_quarters("s", months_from("2018-01", 8))
    assert [len(q.months) for q in spans] == [2, 2, 2, 2]
    assert [q.index for q in spans] == [1, 2, 3, 4]


def test_split_remainder_to_earliest():
    spans = split_quarters("s", months_from("2018-01", 10))
    assert [len(q.months) for q in spans] == [3, 3, 2, 2]
    # enumeration check: sizes never differ by more than one, ordered spans
    for n in range(4, 30):
        sizes = [len(q.months) for q in split_quarters("s", months_from("2018-01", n))]
        assert sum(sizes) == n
        assert max(sizes) - min(sizes) <= 1
        assert sizes == sorted(sizes, reverse=True)


def test_split_too_short_errors():
    with pytest.raises(ValueError):
        split_quarters("s", months_from("2018-01", 3))


def test_quarters_partition_and_cutoffs_increase():
    spans = split_quarters("s", months_from("2018-01", 13))
    flat = [m for q in spans for m in q.months]
    assert flat == months_from("2018-01", 13)
    cutoffs = [q.cutoff for q in spans]
    assert cutoffs == sorted(cutoffs) and len(set(cutoffs)) == 4


def test_quarters_of_gapped_lifespan():
    active = ["2018-01", "2018-02", "2018-05", "2018-06", "2018-09"]
    spans = split_quarters("s", active)
    assert [q.months for q in spans] == (
        [("2018-01", "2018-02"), ("2018-05",), ("2018-06",), ("2018-09",)]
    )


# -- lexicon scores ----------------------------------------------------------------


def test_lexicon_scores_empty_all_zero():
    lex = demo_lexicon()
    scores = lexicon_scores([], lex)
    assert set(scores) == set(lex.categories)
    assert all(v == 0.0 for v in scores.values())


def test_lexicon_scores_pure_category():
    lex = Lexicon(name="t", categories={"a": frozenset({"x"}), "b": frozenset({"y"})})
    scores = lexicon_scores(["x", "x", "x"], lex)
    assert scores == {"a": 1.0, "b": 0.0}


def test_lexicon_scores_counting():
    lex = Lexicon(name="t", categories={"pos": frozenset({"happi"}), "neg": frozenset({"sad"})})
    tokens = tokenize("happy happy sad")
    scores = lexicon_scores(tokens, lex)
    assert scores["pos"] == pytest.approx(2 / 3)
    assert scores["neg"] == pytest.approx(1 / 3)


# -- toxicity rate -----------------------------------------------------------------


def _toxic_fixture():
    bodies = ["hate hate awful"] * 3 + ["calm words entirely"] * 7
    comments = [comment(f"c{i}", body=b, month="2018-02") for i, b in enumerate(bodies)]
    return make_store(comments=comments)


def test_toxicity_rate_constant_scorers():
    store = _toxic_fixture()
    lex = demo_lexicon()
    zero = FeatureContext(store, lex, ConstantScorer(0.0))
    one = FeatureContext(store, lex, ConstantScorer(1.0))
    sid = StateId("sub", "2018-02")
    assert toxicity_rate(zero, sid) == 0.0
    assert toxicity_rate(one, sid, threshold=0.5) == 1.0


def test_toxicity_rate_indicator_fixture():
    ctx = make_context(_toxic_fixture())
    assert toxicity_rate(ctx, StateId("sub", "2018-02")) == pytest.approx(0.3)


# -- feature extraction --------------------------------------------------------------


def _quarter(sub, months):
    return QuarterSpan(subreddit=sub, index=1, months=tuple(months))


def test_no_mentions_means_zero_mention_features():
    store = make_store(comments=[comment("c1", month="2018-01")])
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-01"]))
    for name in ("mentions_community", "mentions_community_negative", "mentions_news", "mentions_news_negative"):
        assert row.values[name] == 0.0


def test_users_connected_to_banned_fixture():
    # u1 and u2 were active in "badplace" before it was banned in 2018-02;
    # both are active in "sub" during the quarter -> feature = 2
    comments = [
        comment("b1", author="u1", subreddit="badplace", month="2018-01"),
        comment("b2", author="u2", subreddit="badplace", month="2018-01"),
        comment("s1", author="u1", subreddit="sub", month="2018-03"),
        comment("s2", author="u2", subreddit="sub", month="2018-03"),
        comment("s3", author="u3", subreddit="sub", month="2018-03"),
    ]
    store = make_store(
        comments=comments,
        interventions=[{"subreddit": "badplace", "action": "ban", "date": "2018-02"}],
    )
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-03"]))
    assert row.values["structural_users_banned_connected"] == 2.0


def test_future_ban_does_not_leak():
    comments = [
        comment("b1", author="u1", subreddit="badplace", month="2018-01"),
        comment("s1", author="u1", subreddit="sub", month="2018-03"),
    ]
    store = make_store(
        comments=comments,
        interventions=[{"subreddit": "badplace", "action": "ban", "date": "2018-04"}],
    )
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-03"]))  # cutoff 2018-03
    assert row.values["structural_users_banned_connected"] == 0.0
    assert row.values["vocabulary_banned_cosine_mean"] == 0.0


def test_own_intervention_never_in_banned_set():
    comments = [comment("s1", author="u1", subreddit="sub", month="2018-03")]
    store = make_store(
        comments=comments,
        interventions=[{"subreddit": "sub", "action": "ban", "date": "2018-03"}],
    )
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-03"]))
    assert row.values["structural_users_banned_connected"] == 0.0
    assert row.label == "intervened"


def test_empty_quarter_is_flagged_zero_row():
    store = make_store(comments=[comment("c1", month="2018-01")])
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-05"]))
    assert "empty_quarter" in row.flags
    assert all(v == 0.0 for v in row.values.values())


def test_schema_stable_across_rows():
    store = make_store(comments=[
        comment("c1", subreddit="a", month="2018-01"),
        comment("c2", subreddit="b", month="2018-02", body="hate you"),
    ])
    ctx = make_context(store)
    schema = feature_schema(ctx.lexicon)
    r1 = extract_features(ctx, "a", _quarter("a", ["2018-01"]))
    r2 = extract_features(ctx, "b", _quarter("b", ["2018-02"]))
    assert list(r1.values) == list(r2.values) == schema
    assert all(np.isfinite(v) for v in r1.values.values())


def test_community_counts_and_moments():
    comments = [
        comment("c1", author="u1", score=2, parent_id="p1"),
        comment("c2", author="u2", score=4, parent_id="p1"),
        comment("c3", author="u1", score=6, parent_id="p2"),
    ]
    posts = [post("p1", score=10), post("p2", score=20), post("p3", score=30)]
    store = make_store(comments=comments, posts=posts)
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-03"]))
    v = row.values
    assert v["community_active_commenters"] == 2.0
    assert v["community_posts"] == 3.0
    assert v["community_comments"] == 3.0
    assert v["community_comment_score_mean"] == pytest.approx(4.0)
    assert v["community_comment_score_median"] == pytest.approx(4.0)
    assert v["community_comments_per_post_mean"] == pytest.approx(1.0)  # [2,1,0]
    assert v["community_comments_per_post_p90"] == pytest.approx(np.percentile([2, 1, 0], 90))


def test_moderator_features_from_roster():
    comments = [
        comment("c1", author="mod1", score=5),
        comment("c2", author="user", score=1),
        comment("c3", author="AutoModerator"),
    ]
    store = make_store(
        comments=comments,
        posts=[post("p1", removed=True, score=7)],
        moderators=[
            {"subreddit": "sub", "user": "mod1", "start_month": "2018-01"},
            {"subreddit": "sub", "user": "mod2", "start_month": "2018-03"},
            {"subreddit": "sub", "user": "mod3", "start_month": "2018-01", "end_month": "2018-03"},
        ],
    )
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-03"]))
    v = row.values
    assert v["moderators_count"] == 3.0
    assert v["moderators_incoming"] == 1.0
    assert v["moderators_outgoing"] == 1.0
    assert v["moderators_comment_score_mean"] == pytest.approx(5.0)
    assert v["moderators_automoderator_comments"] == 1.0
    assert v["moderators_removed_posts"] == 1.0
    assert v["moderators_removed_post_score_total"] == 7.0
    assert "no_moderator_roster" not in row.flags


def test_missing_roster_flagged():
    store = make_store(comments=[comment("c1")])
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-03"]))
    assert "no_moderator_roster" in row.flags
    assert row.values["moderators_count"] == 0.0


def test_user_growth_within_quarter():
    comments = [
        comment("c1", author="u1", month="2018-01"),
        comment("c2", author="u1", month="2018-02"),
        comment("c3", author="u2", month="2018-02"),
        comment("c4", author="u3", month="2018-02"),
    ]
    store = make_store(comments=comments)
    ctx = make_context(store)
    row = extract_features(ctx, "sub", _quarter("sub", ["2018-01", "2018-02"]))
    assert row.values["community_user_growth_pct"] == pytest.approx((3 - 1) / 1)


# -- the leakage property ---------------------------------------------------------------


def _random_fixture(rng, n_subs=4, n_months=6):
    """A small random corpus plus records strictly after a chosen cutoff."""
    months = month_range("2018-01", add_months("2018-01", n_months - 1))
    cut_idx = int(rng.integers(1, n_months - 1))
    cutoff = months[cut_idx]
    subs = [f"s{i}" for i in range(n_subs)]
    comments, posts, interventions, mentions = [], [], [], []
    n = 0
    for sub in subs:
        for m_idx, month in enumerate(months):
            for _ in range(int(rng.integers(1, 5))):
                comments.append(
                    comment(
                        f"c{n}",
                        author=f"u{int(rng.integers(0, 10))}",
                        subreddit=sub,
                        month=month,
                        body=" ".join(
                            rng.choice(["alpha", "beta", "gamma", "hate", "calm"], size=4)
                        ),
                        score=int(rng.integers(-2, 9)),
                        controversial=bool(rng.random() < 0.2),
                    )
                )
                n += 1
            if rng.random() < 0.5:
                posts.append(post(f"p{n}", subreddit=sub, month=month, title="beta gamma topic"))
                n += 1
            if rng.random() < 0.3:
                mentions.append(
                    {
                        "target_subreddit": sub,
                        "source": "community" if rng.random() < 0.5 else "news",
                        "date": month,
                        "sentiment": "negative" if rng.random() < 0.5 else "other",
                    }
                )
    if rng.random() < 0.7:
        interventions.append({"subreddit": subs[1], "action": "ban", "date": months[0]})

    before = {
        "comments": [c for c in comments if c["created"] < 10**20],  # all
        "posts": posts,
        "interventions": interventions,
        "mentions": [m for m in mentions],
    }
    # records strictly after the cutoff: activity anywhere, mentions of the
    # subject, and interventions for *other* communities (the subject's own
    # later intervention is its hindsight label, not a feature)
    extra_comments = [
        comment(
            f"x{j}",
            author=f"u{int(rng.integers(0, 10))}",
            subreddit=subs[int(rng.integers(0, n_subs))],
            month=months[int(rng.integers(cut_idx + 1, n_months))],
            body="entirely new future words hate",
        )
        for j in range(10)
    ]
    extra_mentions = [
        {
            "target_subreddit": subs[0],
            "source": "news",
            "date": months[-1],
            "sentiment": "negative",
        }
    ]
    extra_interventions = [
        {"subreddit": subs[2], "action": "quarantine", "date": months[-1]},
    ]
    after = {
        "comments": extra_comments,
        "mentions": extra_mentions,
        "interventions": extra_interventions,
    }
    return before, after, cutoff, subs[0], months


def test_leakage_appending_future_records_never_changes_row():
    rng = np.random.default_rng(42)
    for trial in range(30):
        before, after, cutoff, subject, months = _random_fixture(rng)
        quarter = QuarterSpan(
            subreddit=subject, index=2,
            months=tuple(m for m in months if m <= cutoff)[-2:],
        )
        store_a = make_store(**{k: v for k, v in before.items()})
        ctx_a = make_context(store_a, sample_fraction=0.8, sample_seed=5)
        row_a = extract_features(ctx_a, subject, quarter)

        merged = {
            "comments": before["comments"] + after["comments"],
            "posts": before["posts"],
            "interventions": before["interventions"] + after["interventions"],
            "mentions": before["mentions"] + after["mentions"],
        }
        store_b = make_store(**merged)
        ctx_b = make_context(store_b, sample_fraction=0.8, sample_seed=5)
        row_b = extract_features(ctx_b, subject, quarter)
        assert row_a.to_bytes() == row_b.to_bytes(), f"leak in trial {trial}"


def test_structural_count_monotone_in_cutoff():
    comments = [
        comment("b1", author="u1", subreddit="bad1", month="2018-01"),
        comment("b2", author="u2", subreddit="bad2", month="2018-02"),
        comment("s1", author="u1", subreddit="sub", month="2018-03"),
        comment("s2", author="u2", subreddit="sub", month="2018-03"),
    ]
    store = make_store(
        comments=comments,
        interventions=[
            {"subreddit": "bad1", "action": "ban", "date": "2018-02"},
            {"subreddit": "bad2", "action": "ban", "date": "2018-05"},
        ],
    )
    ctx = make_context(store)
    users = {"u1", "u2"}
    counts = [
        banned_connected_users(ctx, users, cutoff, exclude="sub")
        for cutoff in month_range("2018-01", "2018-06")
    ]
    assert counts == sorted(counts)
    assert counts[-1] == 2


def test_dataset_excludes_short_lifespans():
    comments = [comment(f"c{i}", subreddit="tiny", month=m) for i, m in enumerate(["2018-01", "2018-02"])]
    comments += [
        comment(f"d{i}", subreddit="full", month=m)
        for i, m in enumerate(months_from("2018-01", 5))
    ]
    store = make_store(comments=comments)
    ctx = make_context(store)
    dataset = build_feature_dataset(ctx)
    assert "tiny" in dataset.excluded
    assert {r.subreddit for r in dataset.rows} == {"full"}
    assert len(dataset.rows) == 4


def test_single_month_row_matches_quarter_schema():
    store = make_store(comments=[comment("c1", month="2018-02")])
    ctx = make_context(store)
    row = single_month_row(ctx, "sub", "2018-02")
    assert list(row.values) == feature_schema(ctx.lexicon)
    assert row.quarter.cutoff == "2018-02"

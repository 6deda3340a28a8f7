import csv
import json
from pathlib import Path

import pytest

from modwatch.cli import load_features_csv, main
from modwatch.config import RunConfig, parse_config_text
from modwatch.synth import generate_planted_corpus


# -- config parsing ----------------------------------------------------------------


def test_parse_config_values():
    text = """
    # run settings
    [corpus]
    window_start = "2018-01"
    sample_fraction = 0.5
    sample_seed = 7
    [models]
    model_kind = "forest"
    n_trees = 25
    """
    flat = parse_config_text(text)
    assert flat["corpus.window_start"] == "2018-01"
    assert flat["corpus.sample_fraction"] == 0.5
    assert flat["corpus.sample_seed"] == 7
    assert flat["models.n_trees"] == 25


def test_config_hash_stable_and_sensitive(tmp_path):
    path = tmp_path / "a.toml"
    path.write_text('[corpus]\nwindow_start = "2018-01"\nwindow_end = "2018-12"\n')
    c1 = RunConfig.from_file(path)
    c2 = RunConfig.from_file(path)
    assert c1.config_hash() == c2.config_hash()
    path.write_text('[corpus]\nwindow_start = "2018-02"\nwindow_end = "2018-12"\n')
    assert RunConfig.from_file(path).config_hash() != c1.config_hash()


def test_bad_config_line_errors(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("this is not a key value line\n")
    with pytest.raises(ValueError):
        RunConfig.from_file(path)


# -- pipeline end to end -----------------------------------------------------------------


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """ingest -> vectorize -> distances -> features -> train -> evaluate on a
    small planted corpus, via the real CLI entry point."""
    out = tmp_path_factory.mktemp("work")
    # 10 problematic keeps >= 6 minority rows in every CV fold's training
    # side, the floor for ADASYN's k+1 neighbor requirement at k=5
    corpus = generate_planted_corpus(
        seed=3, n_subreddits=20, n_problematic=10, n_months=10,
        comments_per_state=(25, 45), iv_start_index=7,
    )
    inputs = corpus.write_ndjson(out / "input")
    cfg = out / "run.toml"
    cfg.write_text(
        "\n".join(
            [
                "[corpus]",
                f'window_start = "{corpus.window_start}"',
                f'window_end = "{corpus.window_end}"',
                f'comments = "{inputs["comments"]}"',
                f'posts = "{inputs["posts"]}"',
                f'interventions = "{inputs["interventions"]}"',
                f'mentions = "{inputs["mentions"]}"',
                f'moderators = "{inputs["moderators"]}"',
                "[models]",
                "n_trees = 20",
            ]
        )
        + "\n"
    )
    for cmd in ("ingest", "vectorize", "features"):
        assert main([cmd, "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["distances", "--config", str(cfg), "--out", str(out), "--p", "0.98"]) == 0
    assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["evaluate", "--config", str(cfg), "--out", str(out), "--window", "Total"]) == 0
    return {"out": out, "cfg": cfg, "corpus": corpus}


def test_ingest_writes_store_and_report(workdir):
    out = workdir["out"]
    assert (out / "corpus" / "meta.json").exists()
    report = json.loads((out / "ingest_report.json").read_text())
    assert report["reports"]["comments"]["accepted"] > 0
    assert "config_hash" in report


def test_vectorize_writes_sidecars_for_every_state(workdir):
    out = workdir["out"]
    sidecars = list((out / "vectors").glob("vocabulary-*.json"))
    assert len(sidecars) == 10  # one per month
    payload = json.loads(sidecars[0].read_text())
    assert payload["format"] == "modwatch.vectors.v1"
    assert payload["states"]
    user_sidecars = list((out / "vectors").glob("user-*.json"))
    assert len(user_sidecars) == 10


def test_distances_csv_has_series_per_subreddit(workdir):
    out = workdir["out"]
    with open(out / "distances.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["kind"] for r in rows} == {"vocabulary", "user"}
    by_sub = {r["subreddit"] for r in rows}
    assert "clean00" in by_sub and "problem00" in by_sub
    for r in rows[:50]:
        assert 0.0 <= float(r["rbo_distance"]) <= 1.0
    summary = json.loads((out / "distance_summary.json").read_text())
    assert summary["ks"] and all("p_value" in k for k in summary["ks"])


def test_features_csv_roundtrip(workdir):
    out = workdir["out"]
    rows, schema = load_features_csv(out / "features.csv")
    assert len(rows) > 0
    assert all(set(r.values) == set(schema) for r in rows[:5])
    labels = {r.label for r in rows}
    assert labels == {"intervened", "clean"}


def test_eval_report_has_table_fields(workdir):
    out = workdir["out"]
    payload = json.loads((out / "eval_Total.json").read_text())
    hold = payload["holdout"]
    assert set(hold) == {"window", "auc", "f1_negative", "f1_positive", "confusion"}
    assert set(hold["confusion"]) == {"tn", "fp", "fn", "tp"}
    assert len(payload["cv"]) == 5
    assert "cv_mean_auc" in payload
    assert payload["config_hash"]


def test_model_artifact_written(workdir):
    out = workdir["out"]
    model = json.loads((out / "model.json").read_text())
    assert model["format"] == "modwatch.model.v1"
    assert model["metadata"]["window"] == "Total"


def test_rerun_is_byte_identical(workdir):
    out, cfg = workdir["out"], workdir["cfg"]
    before = (out / "features.csv").read_bytes()
    assert main(["features", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "features.csv").read_bytes() == before


def test_impact_subcommand(workdir):
    out, cfg = workdir["out"], workdir["cfg"]
    target = workdir["corpus"].problematic[0]
    assert main(["impact", "--config", str(cfg), "--out", str(out),
                 "--subreddit", target, "--window-months", "2"]) == 0
    with open(out / f"impact_{target}.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    metrics = {r["metric"] for r in rows}
    assert metrics == {"hate_incidence", "problematic_participation"}
    offsets = sorted({int(r["offset"]) for r in rows})
    assert offsets == [-2, -1, 0, 1, 2]


def test_unknown_subcommand_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--out", "x"])
    assert exc.value.code == 2


def test_missing_corpus_errors_with_json(tmp_path, capsys):
    code = main(["vectorize", "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert json.loads(err.strip())["code"] == "not_found"

"""Batch pipeline driver: one subcommand per stage, file handoff between
stages, every artifact stamped with the run-config hash.

    modwatch ingest    --config run.toml --out work/
    modwatch vectorize --config run.toml --out work/
    modwatch distances --config run.toml --out work/ [--kind vocabulary] [--p 0.98]
    modwatch features  --config run.toml --out work/
    modwatch train     --config run.toml --out work/ [--window Total]
    modwatch evaluate  --config run.toml --out work/ [--window Total]
    modwatch simulate  --config run.toml --out work/
    modwatch impact    --config run.toml --out work/ --subreddit NAME
    modwatch serve     --config run.toml --out work/ [--port 8000]
    modwatch demo      --out demo/ [--port 8000] [--no-serve]

MODWATCH_LOG controls verbosity (debug/info/warning/error).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig
from .corpus import CorpusStore, StateId
from .features import (
    FeatureContext,
    FeatureRow,
    QuarterSpan,
    build_feature_dataset,
    feature_schema,
)
from .impact import (
    HATE_INCIDENCE,
    PROBLEMATIC_PARTICIPATION,
    event_series,
    lsh_match_controls,
    participation_vectors,
)
from .lexicon import LexiconIndicatorScorer, LexiconRateScorer, demo_lexicon, load_lexicon
from .models import Hyperparameters, protocol_run, train
from .models.continual import simulate_continuous
from .pipeline import EvolutionAnalysis, distances_csv_rows, ks_by_label
from .service import ModerationService

log = logging.getLogger("modwatch")


def _setup_logging() -> None:
    level = os.environ.get("MODWATCH_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(code: str, message: str) -> int:
    sys.stderr.write(json.dumps({"code": code, "message": message}) + "\n")
    return 1


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _corpus_dir(out: str) -> Path:
    return Path(out) / "corpus"


def _load_store(cfg: RunConfig, out: str) -> CorpusStore:
    directory = _corpus_dir(out)
    if not (directory / "meta.json").exists():
        raise FileNotFoundError(f"no ingested corpus under {directory}; run `modwatch ingest` first")
    return CorpusStore.load(directory)


def _make_scorer(cfg: RunConfig, lex):
    if cfg.scorer == "rate":
        return LexiconRateScorer(lex)
    return LexiconIndicatorScorer(lex)


def _make_context(cfg: RunConfig, store: CorpusStore) -> FeatureContext:
    lex = load_lexicon(cfg.lexicon_path) if cfg.lexicon_path else demo_lexicon()
    return FeatureContext(
        store,
        lex,
        _make_scorer(cfg, lex),
        toxicity_threshold=cfg.toxicity_threshold,
        sample_fraction=cfg.sample_fraction,
        sample_seed=cfg.sample_seed,
    )


def _hyper(cfg: RunConfig) -> Hyperparameters:
    return Hyperparameters(
        max_depth=cfg.max_depth, min_leaf=cfg.min_leaf, n_trees=cfg.n_trees, l2=cfg.l2
    )


def _stamp(cfg: RunConfig, payload: dict) -> dict:
    payload["config_hash"] = cfg.config_hash()
    payload["config"] = cfg.to_dict()
    return payload


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))


# -- stages ---------------------------------------------------------------------


def cmd_ingest(args) -> int:
    cfg = _load_config(args)
    store = CorpusStore(cfg.window_start, cfg.window_end)
    reports = {}
    for kind, path in (
        ("comments", cfg.comments),
        ("posts", cfg.posts),
        ("interventions", cfg.interventions),
        ("mentions", cfg.mentions),
        ("moderators", cfg.moderators),
    ):
        if path:
            rep = store.ingest_file(path, kind)
            reports[kind] = {
                "accepted": rep.accepted, "skipped": rep.skipped, "reasons": dict(rep.reasons),
            }
    store.save(_corpus_dir(args.out))
    _write_json(Path(args.out) / "ingest_report.json", _stamp(cfg, {"reports": reports}))
    print(json.dumps(reports))
    return 0


def cmd_vectorize(args) -> int:
    cfg = _load_config(args)
    store = _load_store(cfg, args.out)
    analysis = EvolutionAnalysis(store, cfg.sample_fraction, cfg.sample_seed, cfg.rbo_p)
    vec_dir = Path(args.out) / "vectors"
    analysis.save_vectors(vec_dir)
    corpus = analysis.token_corpus()
    _write_json(
        Path(args.out) / "vector_meta.json",
        _stamp(cfg, {
            "n_tokens": len(corpus.doc_frequency),
            "n_documents": corpus.n_documents,
            "n_states": len(analysis.states),
            "excluded_states": [f"{s.subreddit}/{s.month}" for s in analysis.excluded_states()],
        }),
    )
    print(f"wrote vector sidecars to {vec_dir}")
    return 0


def cmd_distances(args) -> int:
    cfg = _load_config(args)
    if args.p is not None:
        cfg.rbo_p = args.p
    store = _load_store(cfg, args.out)
    analysis = EvolutionAnalysis(store, cfg.sample_fraction, cfg.sample_seed, cfg.rbo_p)
    kinds = [args.kind] if args.kind else ["vocabulary", "user"]
    csv_path = Path(args.out) / "distances.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subreddit", "kind", "month_from", "month_to", "rbo_distance"])
        for kind in kinds:
            for row in distances_csv_rows(analysis, kind):
                writer.writerow(row)
    intervened = store.intervened_subreddits()
    summary = {"rbo_p": cfg.rbo_p, "ks": []}
    for kind in kinds:
        if intervened and (set(analysis.states.subreddits()) - intervened):
            summary["ks"].append(ks_by_label(analysis, kind, intervened).to_dict())
    _write_json(Path(args.out) / "distance_summary.json", _stamp(cfg, summary))
    print(f"wrote {csv_path}")
    return 0


def _features_csv(path: Path, rows: list[FeatureRow], schema: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subreddit", "quarter", "months", "label", "flags"] + schema)
        for row in rows:
            writer.writerow(
                [
                    row.subreddit,
                    row.quarter.index,
                    "|".join(row.quarter.months),
                    row.label,
                    "|".join(sorted(row.flags)),
                ]
                + [repr(row.values[name]) for name in schema]
            )


def load_features_csv(path: Path) -> tuple[list[FeatureRow], list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        schema = header[5:]
        rows = []
        for rec in reader:
            months = tuple(rec[2].split("|"))
            quarter = QuarterSpan(subreddit=rec[0], index=int(rec[1]), months=months)
            values = {name: float(v) for name, v in zip(schema, rec[5:])}
            flags = [f for f in rec[4].split("|") if f]
            rows.append(
                FeatureRow(subreddit=rec[0], quarter=quarter, values=values, label=rec[3], flags=flags)
            )
    return rows, schema


def cmd_features(args) -> int:
    cfg = _load_config(args)
    store = _load_store(cfg, args.out)
    ctx = _make_context(cfg, store)
    dataset = build_feature_dataset(ctx)
    path = Path(args.out) / "features.csv"
    _features_csv(path, dataset.rows, dataset.schema)
    _write_json(
        Path(args.out) / "features_meta.json",
        _stamp(cfg, {"rows": len(dataset.rows), "excluded": dataset.excluded}),
    )
    print(f"wrote {path} ({len(dataset.rows)} rows)")
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    window = args.window or cfg.window
    rows, schema = load_features_csv(Path(args.out) / "features.csv")
    from .models.protocol import build_window_matrix

    X, y, names, _subs = build_window_matrix(rows, window, schema)
    artifact = train(
        X, y, cfg.model_kind, names,
        hyper=_hyper(cfg), sampling=cfg.sampling_strategy, seed=cfg.seed,
        metadata={"window": window, "config_hash": cfg.config_hash()},
    )
    path = Path(args.out) / "model.json"
    artifact.save(path)
    print(f"wrote {path}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    window = args.window or cfg.window
    rows, schema = load_features_csv(Path(args.out) / "features.csv")
    result = protocol_run(
        rows, window, cfg.model_kind, cfg.sampling_strategy, cfg.seed, schema,
        hyper=_hyper(cfg), threshold=cfg.flag_threshold,
    )
    payload = _stamp(cfg, result.to_dict())
    path = Path(args.out) / f"eval_{window.replace('+', '')}.json"
    _write_json(path, payload)
    print(json.dumps(result.holdout_report.to_dict()))
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    store = _load_store(cfg, args.out)
    ctx = _make_context(cfg, store)
    ledger = simulate_continuous(
        store, ctx,
        (cfg.initial_window_start or cfg.window_start, cfg.initial_window_end),
        cfg.simulate_start, cfg.simulate_end or cfg.window_end,
        cfg.model_kind, cfg.sampling_strategy, cfg.seed,
        hyper=_hyper(cfg), threshold=cfg.flag_threshold,
    )
    path = Path(args.out) / "simulation.json"
    path.write_text(ledger.to_json())
    with open(Path(args.out) / "simulation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", "flagged", "tp", "fn", "training_rows"])
        for month in sorted(ledger.flagged_by_month):
            writer.writerow(
                [
                    month,
                    len(ledger.flagged_by_month[month]),
                    len(ledger.tp_by_month.get(month, [])),
                    len(ledger.fn_by_month.get(month, [])),
                    ledger.training_size_by_month.get(month, 0),
                ]
            )
    print(json.dumps(ledger.totals()))
    return 0


def cmd_impact(args) -> int:
    cfg = _load_config(args)
    store = _load_store(cfg, args.out)
    subject = args.subreddit
    event_month = args.event_month or store.intervention_month(subject)
    if event_month is None:
        return _fail("no_event", f"{subject} has no intervention and no --event-month given")
    vectors = participation_vectors(store, event_month)
    ever_members = {
        c.author for c in store.comments if c.subreddit == subject and not c.author_deleted
    }
    treatment = {u: v for u, v in vectors.items() if u in ever_members}
    candidates = {u: v for u, v in vectors.items() if u not in ever_members}
    if not treatment:
        return _fail("no_treatment", f"no active members of {subject} in {event_month}")
    matching = lsh_match_controls(treatment, candidates, seed=cfg.seed)
    lex = load_lexicon(cfg.lexicon_path) if cfg.lexicon_path else demo_lexicon()
    scorer = _make_scorer(cfg, lex)
    user_events = {u: event_month for u in treatment}
    path = Path(args.out) / f"impact_{subject}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "offset", "treatment_mean", "control_mean"])
        for metric in (HATE_INCIDENCE, PROBLEMATIC_PARTICIPATION):
            series = event_series(
                store, user_events, matching.matches, metric, args.window_months,
                scorer=scorer, threshold=cfg.toxicity_threshold,
            )
            for offset in sorted(series.treatment):
                writer.writerow(
                    [metric, offset, repr(series.treatment[offset]), repr(series.control[offset])]
                )
    print(f"wrote {path} (fallbacks: {len(matching.exact_fallbacks)})")
    return 0


def _build_service(cfg: RunConfig, out: str) -> ModerationService:
    store = _load_store(cfg, out)
    ctx = _make_context(cfg, store)
    analysis = EvolutionAnalysis(store, cfg.sample_fraction, cfg.sample_seed, cfg.rbo_p)
    return ModerationService(
        store, ctx, analysis,
        data_dir=Path(out) / "service",
        initial_window=(
            cfg.initial_window_start or cfg.window_start,
            cfg.initial_window_end or cfg.window_end,
        ),
        model_kind=cfg.model_kind,
        sampling=cfg.sampling_strategy,
        seed=cfg.seed,
        hyper=_hyper(cfg),
        threshold=cfg.flag_threshold,
    )


def cmd_serve(args) -> int:
    import uvicorn

    from .webapp import create_app

    cfg = _load_config(args)
    service = _build_service(cfg, args.out)
    if args.cycle_month:
        service.flag_cycle(args.cycle_month)
    app = create_app(service, auth_token=cfg.auth_token, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_demo(args) -> int:
    """Build a small self-contained demo workspace from the planted-signal
    generator, run the batch pipeline over it, and (optionally) serve it."""
    from .synth import generate_planted_corpus

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus = generate_planted_corpus(
        seed=args.seed if args.seed is not None else 7,
        n_subreddits=18,
        n_problematic=4,
        n_months=12,
        comments_per_state=(40, 70),
        iv_start_index=8,
    )
    inputs = corpus.write_ndjson(out / "input")
    cfg = RunConfig(
        window_start=corpus.window_start,
        window_end=corpus.window_end,
        comments=str(inputs["comments"]),
        posts=str(inputs["posts"]),
        interventions=str(inputs["interventions"]),
        mentions=str(inputs["mentions"]),
        moderators=str(inputs["moderators"]),
        n_trees=50,
        initial_window_start=corpus.window_start,
        initial_window_end="2018-09",
    )
    cfg_path = out / "run.toml"
    cfg_lines = [
        "[corpus]",
        f'window_start = "{cfg.window_start}"',
        f'window_end = "{cfg.window_end}"',
        f'comments = "{cfg.comments}"',
        f'posts = "{cfg.posts}"',
        f'interventions = "{cfg.interventions}"',
        f'mentions = "{cfg.mentions}"',
        f'moderators = "{cfg.moderators}"',
        "[models]",
        "n_trees = 50",
        # only 4 labeled positives at demo scale: below ADASYN's k+1 floor,
        # so the demo uses the plain random-oversampling baseline
        'sampling_strategy = "oversample"',
        "[service]",
        f'initial_window_start = "{cfg.initial_window_start}"',
        f'initial_window_end = "{cfg.initial_window_end}"',
    ]
    cfg_path.write_text("\n".join(cfg_lines) + "\n")

    ns = argparse.Namespace(config=str(cfg_path), out=str(out), seed=args.seed,
                            kind=None, p=None, window=None)
    for stage in (cmd_ingest, cmd_vectorize, cmd_distances, cmd_features, cmd_train):
        code = stage(ns)
        if code != 0:
            return code
    print(f"demo workspace ready under {out}")
    if args.no_serve:
        return 0
    serve_ns = argparse.Namespace(
        config=str(cfg_path), out=str(out), seed=args.seed,
        port=args.port, host=args.host, cycle_month="2018-10", static_dir=args.static_dir,
    )
    return cmd_serve(serve_ns)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modwatch", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="run config (TOML-style key=value)")
        p.add_argument("--out", required=True, help="artifact directory")
        p.add_argument("--seed", type=int, default=None)

    for name, fn in (
        ("ingest", cmd_ingest), ("vectorize", cmd_vectorize), ("features", cmd_features),
    ):
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("distances")
    common(p)
    p.add_argument("--kind", choices=["vocabulary", "user"])
    p.add_argument("--p", type=float, help="RBO persistence parameter")
    p.set_defaults(func=cmd_distances)

    for name, fn in (("train", cmd_train), ("evaluate", cmd_evaluate)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--window", choices=["Q1", "Q1+Q2", "Q1+Q2+Q3", "Total"])
        p.set_defaults(func=fn)

    p = sub.add_parser("simulate")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("impact")
    common(p)
    p.add_argument("--subreddit", required=True)
    p.add_argument("--event-month")
    p.add_argument("--window-months", type=int, default=6)
    p.set_defaults(func=cmd_impact)

    p = sub.add_parser("serve")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--cycle-month", help="run one flag cycle at startup")
    p.add_argument("--static-dir", help="dashboard asset directory to mount at /ui")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("demo")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static-dir", help="dashboard asset directory to mount at /ui")
    p.add_argument("--no-serve", action="store_true")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail("not_found", str(exc))
    except ValueError as exc:
        return _fail("invalid", str(exc))


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    causecommit filter | template | train | cv | classify | aggregate |
                correlate | audit | sentiment-report  [options]

Options may come from a JSON config file (``--config``); flags win over file
values. Relative paths inside a config file resolve against its directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import audit as audit_mod
from . import embedding, features, ingest, learn, pipeline, stats
from .textproc import POLARITIES, Annotator

log = logging.getLogger("causecommit")

SUBCOMMANDS = ("filter", "template", "train", "cv", "classify", "aggregate", "correlate",
               "audit", "sentiment-report")

DEFAULTS = {
    "threshold": embedding.DEFAULT_RELEVANCE_THRESHOLD,
    "tau": pipeline.DEFAULT_TAU,
    "top_k": audit_mod.DEFAULT_TOP_K,
    "folds": 10,
    "format": "jsonl",
    "budget": learn.DEFAULT_BUDGET,
    "per_entity_top_n": 20,
    "cause": {"name": "eco", "expansion_size": embedding.DEFAULT_EXPANSION_SIZE},
}

PATH_KEYS = ("messages", "labels", "ratings", "embeddings", "classifications",
             "support_model", "commit_model", "positive_lexicon", "negative_lexicon")

STAGE_DEFAULT = {"preset": "best-combination", "lambda": 1.0}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration

def load_config(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config document must be a JSON object")
    base = path.parent
    for key in PATH_KEYS:
        if isinstance(data.get(key), str):
            data[key] = str(base / data[key])
    if isinstance(data.get("out"), str):
        data["out"] = str(base / data["out"])
    return data


def resolve(args) -> dict:
    """Merge defaults, config file and flags (flags win)."""
    cfg = json.loads(json.dumps(DEFAULTS))
    if args.config:
        file_cfg = load_config(args.config)
        cause = file_cfg.pop("cause", None)
        cfg.update(file_cfg)
        if cause is not None:
            if not isinstance(cause, dict):
                raise UsageError("'cause' must be an object")
            cfg["cause"] = {**cfg["cause"], **cause}
    for key, value in vars(args).items():
        if key in ("command", "config", "func") or value is None:
            continue
        if key == "cause_name":
            cfg["cause"] = {"name": value, "expansion_size": cfg["cause"].get("expansion_size")}
            continue
        cfg[key] = value
    for key in PATH_KEYS:
        if cfg.get(key) and not os.path.exists(cfg[key]):
            raise UsageError(f"{key} path does not exist: {cfg[key]}")
    return cfg


def require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) in (None, "")]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def stage_settings(cfg, stage) -> tuple[features.FeatureConfig, float]:
    settings = cfg.get(stage) or STAGE_DEFAULT
    try:
        if "features" in settings:
            fc = features.FeatureConfig.from_dict(settings["features"])
        else:
            fc = features.PRESETS[settings.get("preset", STAGE_DEFAULT["preset"])]
        lam = float(settings.get("lambda", STAGE_DEFAULT["lambda"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid {stage} settings: {exc}") from None
    if lam < 0:
        raise UsageError(f"{stage} lambda must be >= 0")
    return fc, lam


def stage_grid(cfg, stage):
    grid = cfg.get("grid")
    if grid is None:
        return [stage_settings(cfg, stage)]
    try:
        configs = []
        for entry in grid.get("features", []):
            configs.append(features.FeatureConfig.from_dict(entry))
        presets = grid.get("presets")
        if presets or not configs:
            configs += features.default_grid(
                presets=tuple(presets or features.PRESETS),
                min_df=tuple(grid.get("min_df", (1, 3, 5))),
                max_df=tuple(grid.get("max_df", (0.6, 0.8, 1.0))),
                ngram_max=tuple(grid.get("ngram_max", (1, 2, 3))),
            )
        return learn.default_lambda_grid(configs, grid.get("lambdas", learn.DEFAULT_LAMBDAS))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid grid: {exc}") from None


def load_table(cfg):
    if cfg.get("embeddings"):
        return embedding.load_embeddings(cfg["embeddings"])
    return embedding.load_toy_embeddings()


def load_profile(cfg, table):
    cause = cfg["cause"]
    seeds = cause.get("seeds") or embedding.CAUSE_KEYWORDS.get(cause.get("name"))
    if not seeds:
        raise UsageError(f"cause {cause.get('name')!r} has no seed keywords; give cause.seeds")
    size = cause.get("expansion_size")
    size = embedding.DEFAULT_EXPANSION_SIZE if size is None else int(size)
    return embedding.build_cause_profile(cause.get("name", "cause"), seeds, table, size)


def load_messages(cfg):
    require(cfg, "messages")
    return ingest.ingest_messages(cfg["messages"], cfg["format"])


def make_annotator(cfg):
    lexicon = None
    if cfg.get("positive_lexicon") or cfg.get("negative_lexicon"):
        require(cfg, "positive_lexicon", "negative_lexicon")
        from .textproc import Lexicon
        lexicon = Lexicon.from_files(cfg["positive_lexicon"], cfg["negative_lexicon"])
    return Annotator(lexicon=lexicon)


def out_path(cfg):
    require(cfg, "out")
    return Path(cfg["out"])


def out_dir(cfg):
    require(cfg, "out")
    path = Path(cfg["out"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path, payload, cfg):
    if cfg.get("timestamp"):
        payload = {"generated_at": datetime.now(timezone.utc).isoformat(), **payload}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_filter(cfg):
    table = load_table(cfg)
    profile = load_profile(cfg, table)
    msgs = load_messages(cfg)
    path = out_path(cfg)
    from .textproc import tokenize
    kept = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for m in msgs:
            score = embedding.relevance_score(tokenize(m), profile, table)
            if embedding.is_relevant(score, cfg["threshold"]):
                kept += 1
                fh.write(json.dumps({"entity": m.entity_id, "id": m.message_id, "text": m.text,
                                     "relevance": score}, ensure_ascii=False, sort_keys=True) + "\n")
    return f"filter: kept {kept} of {len(msgs)} messages at threshold {cfg['threshold']} -> {path}"


def cmd_template(cfg):
    table = load_table(cfg)
    profile = load_profile(cfg, table)
    msgs = load_messages(cfg)
    path = out_path(cfg)
    text = ingest.emit_annotation_template(msgs, profile, table, cfg["threshold"],
                                           int(cfg["per_entity_top_n"]), path)
    rows = text.count("\n") - 1
    return f"template: {rows} rows for manual labeling -> {path}"


def _labeled(cfg):
    require(cfg, "labels")
    msgs = load_messages(cfg)
    examples = ingest.ingest_labels(cfg["labels"], msgs)
    corpus, labels = ingest.labeled_corpus(msgs, examples)
    annotator = make_annotator(cfg)
    return [annotator.annotate(m) for m in corpus], labels


def cmd_train(cfg):
    require(cfg, "seed")
    table = load_table(cfg)
    profile = load_profile(cfg, table)
    corpus, labels = _labeled(cfg)
    dest = out_dir(cfg)
    parts = []
    for stage, name in (("support", "support.json"), ("commitment", "commitment.json")):
        fc, lam = stage_settings(cfg, stage)
        model = learn.fit_stage(corpus, labels, stage, fc, lam, table, profile, int(cfg["budget"]))
        model.training_meta["seed"] = int(cfg["seed"])
        model.save(dest / name)
        parts.append(f"{stage}: {len(model.vocab)} features, "
                     f"{model.training_meta['iterations']} iterations")
    return f"train: {'; '.join(parts)} -> {dest}"


def cmd_cv(cfg):
    require(cfg, "seed")
    table = load_table(cfg)
    profile = load_profile(cfg, table)
    corpus, labels = _labeled(cfg)
    path = out_path(cfg)
    seed, k = int(cfg["seed"]), int(cfg["folds"])
    payload = {"seed": seed, "folds": k, "stages": {}}
    parts = []
    for stage in ("support", "commitment"):
        grid = stage_grid(cfg, stage)
        best, reports = learn.grid_search(corpus, labels, grid, k, seed, stage, table, profile,
                                          int(cfg["budget"]))
        payload["stages"][stage] = {"best_index": best, "best": reports[best].to_dict(),
                                    "reports": [r.to_dict() for r in reports]}
        parts.append(f"{stage} mean F1 {reports[best].mean_f1:.4f} (best of {len(reports)})")
    write_json(path, payload, cfg)
    return f"cv: {'; '.join(parts)} -> {path}"


def cmd_classify(cfg):
    require(cfg, "support_model", "commit_model")
    table = load_table(cfg)
    profile = load_profile(cfg, table)
    msgs = load_messages(cfg)
    sm = learn.LogisticModel.load(cfg["support_model"])
    cm = learn.LogisticModel.load(cfg["commit_model"])
    errors = []
    results = pipeline.classify_corpus(msgs, sm, cm, profile, table, cfg["threshold"],
                                       make_annotator(cfg), errors)
    path = out_path(cfg)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        pipeline.write_classifications(results, fh)
    for pos, mid, exc in errors:
        print(f"warning: message {mid} (#{pos}) skipped: {exc}", file=sys.stderr)
    counts = {lab: 0 for lab in pipeline.FINAL_LABELS}
    for r in results:
        counts[r.final_label] += 1
    dist = ", ".join(f"{k}={v}" for k, v in counts.items())
    return f"classify: {len(results)} messages ({dist}); {len(errors)} skipped -> {path}"


def _read_classifications(cfg):
    require(cfg, "classifications")
    with open(cfg["classifications"], encoding="utf-8") as fh:
        return pipeline.read_classifications(fh)


def cmd_aggregate(cfg):
    cls = _read_classifications(cfg)
    ratings = ingest.ingest_ratings(cfg["ratings"]) if cfg.get("ratings") else None
    profiles = audit_mod.aggregate_corpus(cls, float(cfg["tau"]), ratings)
    path = out_path(cfg)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        audit_mod.write_profiles_csv(profiles, fh)
    return f"aggregate: {len(profiles)} entities from {len(cls)} messages -> {path}"


def cmd_correlate(cfg):
    require(cfg, "ratings")
    cls = _read_classifications(cfg)
    ratings = ingest.ingest_ratings(cfg["ratings"])
    profiles = audit_mod.aggregate_corpus(cls, float(cfg["tau"]), ratings)
    rows = audit_mod.design_rows(profiles)
    result = stats.ols_fit(rows)
    dest = out_dir(cfg)
    with open(dest / "regression.csv", "w", encoding="utf-8", newline="") as fh:
        stats.write_regression_csv(result, fh)
    for name in stats.PREDICTORS:
        with open(dest / f"scatter_{name}.csv", "w", encoding="utf-8", newline="") as fh:
            stats.write_scatter_csv(rows, name, fh)
    coefs = ", ".join(f"{r['predictor']}={r['coef']:.3f} (p={r['p_value']:.3g})"
                      for r in result.table()[1:])
    return f"correlate: n={result.n}, R2={result.r_squared:.3f}; {coefs} -> {dest}"


def cmd_audit(cfg):
    require(cfg, "ratings")
    cls = _read_classifications(cfg)
    ratings = ingest.ingest_ratings(cfg["ratings"])
    report = audit_mod.audit(cls, ratings, int(cfg["top_k"]), float(cfg["tau"]))
    texts = {}
    if cfg.get("messages"):
        texts = {m.message_id: m.text for m in load_messages(cfg)}
    dest = out_dir(cfg)
    write_json(dest / "audit.json", report.to_dict(), cfg)
    write_text(dest / "audit.txt", report.summary())
    with open(dest / "evidence.csv", "w", encoding="utf-8", newline="") as fh:
        audit_mod.write_evidence_csv(report, texts, fh)
    flagged = ", ".join(report.flagged_ids) or "none"
    return f"audit: {len(report.flagged)} flagged ({flagged}) -> {dest}"


def sentiment_table(corpus, labels):
    """Share of POS/NEG/NEU messages per commitment label."""
    counts = {lab: dict.fromkeys(POLARITIES, 0) for lab in ingest.LABEL_RANGE}
    for msg, lab in zip(corpus, labels):
        counts[lab][msg.polarity] += 1
    table = {}
    for lab, row in counts.items():
        n = sum(row.values())
        table[lab] = (n, {p: (row[p] / n if n else 0.0) for p in POLARITIES})
    return table


def cmd_sentiment_report(cfg):
    corpus, labels = _labeled(cfg)
    table = sentiment_table(corpus, labels)
    path = out_path(cfg)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "n", "pos", "neg", "neu"])
        for lab, (n, ratios) in table.items():
            w.writerow([lab, n] + [repr(ratios[p]) for p in POLARITIES])
    return f"sentiment-report: {len(corpus)} labeled messages -> {path}"


HELP = {
    "filter": "keep messages whose relevance clears the threshold",
    "template": "write the manual-labeling worksheet",
    "train": "fit the support and commitment classifiers",
    "cv": "cross-validate (optionally grid-search) both classifiers",
    "classify": "run the two-stage classifier over a corpus",
    "aggregate": "per-entity label counts and metrics",
    "correlate": "regress ratings on log class counts",
    "audit": "flag entities whose words outrun their ratings",
    "sentiment-report": "polarity ratios per commitment label",
}

COMMANDS = {
    "filter": cmd_filter,
    "template": cmd_template,
    "train": cmd_train,
    "cv": cmd_cv,
    "classify": cmd_classify,
    "aggregate": cmd_aggregate,
    "correlate": cmd_correlate,
    "audit": cmd_audit,
    "sentiment-report": cmd_sentiment_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="seed for randomized steps (train, cv)")
    common.add_argument("--threshold", type=float, help="relevance gate (default 0.3)")
    common.add_argument("--tau", type=float, help="confidence threshold (default 0.7)")
    common.add_argument("--top-k", dest="top_k", type=int, help="entities per ranking (default 50)")
    common.add_argument("--folds", type=int, help="cross-validation folds (default 10)")
    common.add_argument("--format", choices=("jsonl", "csv"), help="message file format")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--messages", help="message corpus")
    common.add_argument("--labels", help="CSV of message_id,label")
    common.add_argument("--ratings", help="CSV of entity,rating")
    common.add_argument("--embeddings", help="embedding text file (default: bundled toy table)")
    common.add_argument("--classifications", help="JSONL written by 'classify'")
    common.add_argument("--support-model", dest="support_model")
    common.add_argument("--commit-model", dest="commit_model")
    common.add_argument("--cause", dest="cause_name", help="cause with bundled seeds (eco, health)")
    common.add_argument("--per-entity", dest="per_entity_top_n", type=int,
                        help="template rows per entity (default 20)")
    common.add_argument("--budget", type=int, help="optimizer iteration budget (default 1000)")
    common.add_argument("--positive-lexicon", dest="positive_lexicon")
    common.add_argument("--negative-lexicon", dest="negative_lexicon")
    common.add_argument("--timestamp", action="store_true", default=None,
                        help="stamp JSON reports with the generation time")

    parser = argparse.ArgumentParser(prog="causecommit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = args.verbose
    del args.verbose
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        summary = COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"causecommit {args.command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"causecommit {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())

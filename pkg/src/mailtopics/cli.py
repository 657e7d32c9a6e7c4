"""Operator command line: thin wrappers around the library and service.

Exit codes: 0 success, 1 validation error (bad flags, bad input files),
2 runtime failure. All commands speak JSONL corpora ({id, from, to,
subject, body, received_at} per line) and honor --json for machine output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import MailTopicsError
from .evalkit import load_gold_jsonl, score, time_model_batches
from .filters import classify_disposition, load_default_profiles, load_internal_addresses
from .model_io import load as load_model
from .model_io import save as save_model
from .service import (
    EmailStore,
    PeriodicBatchRunner,
    TopicService,
    dump_clean_docs_jsonl,
    load_clean_docs_jsonl,
)
from .service.api import create_app
from .textprep import (
    PrepConfig,
    RawEmail,
    preprocess_for_inference,
    preprocess_for_training,
)
from .topicmodel import ModelConfig, fit


def _read_corpus(path) -> list[RawEmail]:
    emails = []
    errors = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                emails.append(RawEmail.from_dict(json.loads(line)))
            except (KeyError, ValueError) as err:
                errors.append(f"line {lineno}: {err}")
    if errors:
        print("\n".join(f"skipped {e}" for e in errors), file=sys.stderr)
    return emails


def _load_model_config(path, seed=None) -> ModelConfig:
    if path is None:
        cfg = ModelConfig()
    else:
        raw = Path(path).read_bytes()
        if str(path).endswith(".toml"):
            if sys.version_info >= (3, 11):
                import tomllib
            else:
                import tomli as tomllib
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw)
        cfg = ModelConfig.from_dict(data)
    if seed is not None:
        cfg.seed = seed
    return cfg


def _emit(payload: dict, as_json: bool, human: str) -> None:
    if as_json:
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    else:
        print(human)


def _build_service(args) -> TopicService:
    store = EmailStore(args.store)
    model = load_model(args.model) if getattr(args, "model", None) else None
    docs = load_clean_docs_jsonl(args.docs) if getattr(args, "docs", None) else None
    internal = (
        load_internal_addresses(args.internal_addresses)
        if getattr(args, "internal_addresses", None)
        else set()
    )
    return TopicService(
        store=store,
        model=model,
        prep_cfg=PrepConfig(),
        internal_addrs=internal,
        profiles=load_default_profiles(),
        training_docs=docs,
        model_path=getattr(args, "model", None),
    )


# ---------------------------------------------------------------------- #
# Commands
# ---------------------------------------------------------------------- #


def cmd_prep(args) -> int:
    emails = _read_corpus(args.input)
    kept, rejected = preprocess_for_training(emails, PrepConfig())
    dump_clean_docs_jsonl(kept, args.out)
    if args.rejected:
        with open(args.rejected, "w", encoding="utf-8") as fh:
            for email_id, reason in rejected:
                fh.write(json.dumps({"email_id": email_id, "reason": reason}) + "\n")
    _emit(
        {"kept": len(kept), "rejected": len(rejected)},
        args.json,
        f"kept {len(kept)} documents, rejected {len(rejected)}",
    )
    return 0


def cmd_fit(args) -> int:
    cfg = _load_model_config(args.config, args.seed)
    emails = _read_corpus(args.input)
    kept, rejected = preprocess_for_training(emails, PrepConfig())
    model = fit(kept, cfg)
    save_model(model, args.out)
    clean_out = args.clean_out or f"{args.out}.docs.jsonl"
    dump_clean_docs_jsonl(kept, clean_out)
    _emit(
        {
            "topics": model.n_topics,
            "outliers": model.clusters.outlier_count(),
            "documents": len(kept),
            "rejected": len(rejected),
            "model": str(args.out),
            "clean_docs": str(clean_out),
        },
        args.json,
        f"fitted {model.n_topics} topics over {len(kept)} documents "
        f"({model.clusters.outlier_count()} outliers) -> {args.out}",
    )
    return 0


def cmd_reduce_outliers(args) -> int:
    model = load_model(args.model)
    docs = load_clean_docs_jsonl(args.docs)
    before = model.clusters.outlier_count()
    reduced = model.reduce_outliers(docs)
    save_model(reduced, args.out or args.model)
    _emit(
        {"outliers_before": before, "outliers_after": reduced.clusters.outlier_count()},
        args.json,
        f"outliers {before} -> {reduced.clusters.outlier_count()}",
    )
    return 0


def cmd_transform(args) -> int:
    model = load_model(args.model)
    emails = _read_corpus(args.input)
    prep_cfg = PrepConfig()
    profiles = load_default_profiles()
    internal = (
        load_internal_addresses(args.internal_addresses)
        if args.internal_addresses
        else set()
    )
    out_fh = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for email in emails:
            cleaned = preprocess_for_inference(email, prep_cfg, model.provider.count_tokens)
            disp = classify_disposition(email, cleaned, internal, prep_cfg, profiles)
            row = {
                "email_id": email.id,
                "disposition_kind": disp.kind.value,
                "disposition_reason": disp.reason,
                "model_topic": None,
                "derived_label": None,
                "truncated": False,
            }
            if disp.kind.value == "Process":
                assignment = model.transform(cleaned)
                row.update(
                    model_topic=assignment.model_topic,
                    derived_label=assignment.derived_label,
                    truncated=assignment.truncated,
                )
                if assignment.probabilities is not None:
                    row["probabilities"] = [float(p) for p in assignment.probabilities]
            out_fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    finally:
        if args.out:
            out_fh.close()
    return 0


def _parse_groups(spec: str) -> list[list[int]]:
    groups = []
    for part in spec.split(";"):
        part = part.strip()
        if part:
            groups.append([int(t) for t in part.split(",")])
    return groups


def cmd_merge(args) -> int:
    model = load_model(args.model)
    docs = load_clean_docs_jsonl(args.docs)
    merged = model.merge_topics(docs, _parse_groups(args.groups))
    save_model(merged, args.out or args.model)
    _emit(
        {"topics": merged.n_topics},
        args.json,
        f"merged -> {merged.n_topics} topics",
    )
    return 0


def cmd_label(args) -> int:
    model = load_model(args.model)
    updated = model.with_custom_labels({args.topic: args.label})
    save_model(updated, args.out or args.model)
    _emit(
        {"topic": args.topic, "label": args.label},
        args.json,
        f"topic {args.topic} labeled {args.label!r}",
    )
    return 0


def cmd_map_derived(args) -> int:
    model = load_model(args.model)
    mapping = {int(k): v for k, v in json.loads(Path(args.map).read_text()).items()}
    updated = model.with_derived_map(mapping)
    save_model(updated, args.out or args.model)
    _emit(
        {"entries": len(updated.derived_map), "total": updated.derived_map_is_total()},
        args.json,
        f"derived map now covers {len(updated.derived_map)} entries "
        f"(total: {updated.derived_map_is_total()})",
    )
    return 0


def cmd_eval(args) -> int:
    gold = load_gold_jsonl(args.gold)
    predictions = {}
    with open(args.pred, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                d = json.loads(line)
                predictions[str(d["email_id"])] = d["derived_label"]
    report = score(predictions, gold)
    _emit(report.to_dict(), args.json, report.format_table())
    return 0


def cmd_time(args) -> int:
    model = load_model(args.model)
    emails = _read_corpus(args.input)
    sizes = [int(s) for s in args.sizes.split(",")]
    report = time_model_batches(model, emails, sizes=sizes, runs=args.runs)
    human = "\n".join(
        f"batch {size}: {t.min_seconds_per_email:.6f}-{t.max_seconds_per_email:.6f} s/email "
        f"(mean {t.mean_seconds_per_email:.6f}, {t.runs} runs)"
        for size, t in sorted(report.per_size.items())
    )
    human += f"\nweighted average: {report.weighted_average_seconds_per_email:.6f} s/email"
    _emit(report.to_dict(), args.json, human)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    service = _build_service(args)
    app = create_app(service, api_token=args.token)
    if args.interval and args.interval > 0:
        runner = PeriodicBatchRunner(service, args.batch_limit, args.interval)
        runner.start()
    candidates = [
        args.ui_dir,
        os_environ_ui_dir(),
        Path.cwd() / "frontend" / "dist",
        Path(__file__).resolve().parents[2] / "frontend" / "dist",
    ]
    for static_dir in candidates:
        if static_dir and Path(static_dir).is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")
            break
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def os_environ_ui_dir():
    import os

    return os.environ.get("MAILTOPICS_UI_DIR")


def cmd_ingest(args) -> int:
    store = EmailStore(args.store)
    count = store.import_jsonl(args.input)
    _emit({"ingested": count}, args.json, f"ingested {count} new emails")
    return 0


def cmd_run_batch(args) -> int:
    service = _build_service(args)
    job = service.run_batch(args.limit)
    _emit(
        job.to_dict(),
        args.json,
        f"batch {job.id}: {job.size} emails in {job.wall_time:.2f}s "
        f"({job.per_email_seconds:.4f} s/email) counts={job.counts}",
    )
    return 0


def cmd_report(args) -> int:
    store = EmailStore(args.store)
    service = TopicService(store=store, model=None)
    report = service.monthly_report(args.month)
    human = f"report {args.month}:\n" + "\n".join(
        f"  {label}: {n}" for label, n in sorted(report.label_counts().items())
    )
    _emit(report.to_dict(), args.json, human)
    return 0


def cmd_export_hierarchy(args) -> int:
    model = load_model(args.model)
    tree = model.hierarchy()
    payload = {
        "n_leaves": tree.n_leaves,
        "steps": [
            {"left": s.left, "right": s.right, "distance": s.distance, "new_id": s.new_id}
            for s in tree.steps
        ],
    }
    Path(args.out).write_text(json.dumps(payload, indent=2))
    _emit(payload, args.json, f"wrote {len(tree.steps)} merge steps to {args.out}")
    return 0


# ---------------------------------------------------------------------- #
# Parser
# ---------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mailtopics", description=__doc__)
    parser.add_argument("--json", action="store_true", default=False,
                        help="machine-readable output")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--config", default=None, help="model config file (JSON or TOML)")

    # Global flags are also accepted after the subcommand; SUPPRESS keeps a
    # subcommand-level omission from clobbering a value given up front.
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--config", default=argparse.SUPPRESS)

    sub = parser.add_subparsers(dest="command", required=True, parser_class=lambda **kw: argparse.ArgumentParser(parents=[shared], **kw))

    p = sub.add_parser("prep", help="preprocess a raw corpus for training")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejected", default=None)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("fit", help="fit a topic model from a raw corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--clean-out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reduce-outliers", help="reassign outliers by representation")
    p.add_argument("--model", required=True)
    p.add_argument("--docs", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reduce_outliers)

    p = sub.add_parser("transform", help="assign topics to new emails")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--internal-addresses", default=None)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("merge", help="merge topic groups")
    p.add_argument("--model", required=True)
    p.add_argument("--docs", required=True)
    p.add_argument("--groups", required=True, help='e.g. "0,1;4,5,7"')
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("label", help="set a custom topic label")
    p.add_argument("--model", required=True)
    p.add_argument("--topic", type=int, required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("map-derived", help="set the derived-topic map from JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_map_derived)

    p = sub.add_parser("eval", help="score predictions against gold labels")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("time", help="run the batch timing protocol")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--sizes", default="100,1000,10000")
    p.add_argument("--runs", type=int, default=3)
    p.set_defaults(func=cmd_time)

    p = sub.add_parser("serve", help="run the HTTP API service")
    p.add_argument("--store", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--docs", default=None)
    p.add_argument("--internal-addresses", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--token", default=None)
    p.add_argument("--interval", type=float, default=300.0,
                   help="batch period in seconds; 0 disables periodic batches")
    p.add_argument("--batch-limit", type=int, default=1000)
    p.add_argument("--ui-dir", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ingest", help="load a JSONL corpus into the store")
    p.add_argument("--store", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run-batch", help="process one batch of stored emails")
    p.add_argument("--store", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--docs", default=None)
    p.add_argument("--internal-addresses", default=None)
    p.add_argument("--limit", type=int, default=1000)
    p.set_defaults(func=cmd_run_batch)

    p = sub.add_parser("report", help="monthly label counts")
    p.add_argument("--store", required=True)
    p.add_argument("--month", required=True, help="YYYY-MM")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-hierarchy", help="write the topic dendrogram as JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_hierarchy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (MailTopicsError, ValueError, FileNotFoundError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 - runtime failures exit 2
        print(f"runtime error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

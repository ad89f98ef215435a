"""Command-line front door.

Exit codes: 0 on success, 1 with a single-line "error: ..." on failure,
2 on usage errors (argparse).  All machine outputs are JSON/CSV/SVG/JSONL.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from . import analytics
from .combine import STRATEGIES, combine_reviews, load_vectors
from .control import ControlSequence, Granularity
from .corpus import Split, filter_and_split, load_corpus, write_corpus
from .extract import ENGINES
from .generics import (
    SCORE_FILTERS,
    SIDES,
    assemble_generic,
    build_generic_bank,
    load_bank,
    save_bank,
)
from .harvest import harvest_to_files, load_harvest_config, normalize_records
from .labels import parse_label
from .metrics import evaluate_run, report_to_csv, report_to_json
from .pipeline import (
    read_outputs,
    read_references,
    records_to_outputs,
    references_for_split,
    run_split,
    structure_compliance,
    write_records,
)
from .tagger import (
    evaluate as tagger_evaluate,
    load_labels,
    load_model,
    predict,
    save_model,
    train,
)


def resolve_data_path(raw: str) -> Path:
    """A path as given, or relative to MRED_DATA_DIR when that resolves."""
    path = Path(raw)
    if path.exists():
        return path
    root = os.environ.get("MRED_DATA_DIR")
    if root:
        candidate = Path(root) / raw
        if candidate.exists():
            return candidate
    return path


def _load_corpus_arg(raw: str):
    return load_corpus(resolve_data_path(raw))


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_harvest(args) -> int:
    config = load_harvest_config(resolve_data_path(args.config))
    report = harvest_to_files(config, args.year, args.out)
    print(json.dumps({
        "year": report.year,
        "raw": report.n_raw,
        "normalized": report.n_normalized,
        "dropped_no_meta": report.n_dropped_no_meta,
        "skipped": report.n_skipped,
    }))
    return 0


def cmd_ingest(args) -> int:
    raw_records = []
    for raw_path in args.raw:
        with resolve_data_path(raw_path).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    raw_records.append(json.loads(line))
    corpus, report = normalize_records(raw_records, args.year)
    counts = {
        "raw": report.n_raw,
        "normalized": report.n_normalized,
        "dropped_no_meta": report.n_dropped_no_meta,
        "skipped": report.n_skipped,
        "reviews": corpus.n_reviews,
        "labeled_sentences": corpus.n_labeled_sentences,
    }
    if not args.no_split:
        corpus = filter_and_split(
            corpus,
            min_words=args.min_words,
            max_words=args.max_words,
            seed=args.seed,
        )
        counts["filtered_pairs"] = len(corpus)
        counts["splits"] = {
            s.value: len(corpus.split(s))
            for s in (Split.TRAIN, Split.VALIDATION, Split.TEST)
        }
    write_corpus(corpus, args.out)
    print(json.dumps(counts))
    return 0


_STATS = {
    "categories": lambda c: analytics.category_distribution(c),
    "transition": lambda c: analytics.transition_matrix(c),
    "length-score": lambda c: analytics.length_rating_breakdown(c),
    "length-category": lambda c: analytics.length_category_breakdown(c),
    "borderline": lambda c: analytics.borderline_breakdown(c),
    "occurrence": lambda c: analytics.occurrence_by_score(c),
}


def cmd_stats(args) -> int:
    corpus = _load_corpus_arg(args.corpus)
    result = _STATS[args.report](corpus)
    if args.report == "transition":
        rendered = {
            "json": analytics.transition_to_json,
            "csv": analytics.transition_to_csv,
            "svg": analytics.render_transition_svg,
        }[args.out](result)
    else:
        rendered = {
            "json": analytics.report_to_json,
            "csv": analytics.report_to_csv,
            "svg": analytics.render_report_svg,
        }[args.out](result)
    _write_or_print(rendered, args.path)
    return 0


def cmd_tag(args) -> int:
    corpus = _load_corpus_arg(args.corpus)
    if args.action == "train":
        subs = corpus.split(Split.TRAIN) or list(corpus.submissions)
        model = train(subs)
        save_model(model, args.model)
        print(json.dumps({"trained_on": len(subs), "model": str(args.model)}))
        return 0
    model = load_model(resolve_data_path(args.model))
    if args.action == "predict":
        from .corpus import review_sentences

        assignment = (
            load_labels(resolve_data_path(args.labels), corpus)
            if args.labels
            else None
        )
        with Path(args.out).open("w", encoding="utf-8") as fh:
            for sub in corpus.submissions:
                for review in sub.reviews:
                    sentences = review_sentences(review.text)
                    tagged = predict(model, sentences)
                    for i, ts in enumerate(tagged.sentences):
                        label = ts.label
                        if assignment is not None:
                            external = assignment.get(sub.id, review.reviewer_id, i)
                            if external is not None:
                                label = external
                        fh.write(json.dumps({
                            "submission_id": sub.id,
                            "review_id": review.reviewer_id,
                            "sentence_index": i,
                            "label": label.value,
                        }) + "\n")
        return 0
    # eval
    subs = corpus.split(Split(args.split)) or list(corpus.submissions)
    result = tagger_evaluate(model, subs)
    print(json.dumps({
        "micro_f1": result.micro_f1,
        "macro_f1": result.macro_f1,
        "majority_share": result.majority_share,
        "per_category": result.per_category,
        "support": result.support,
    }))
    return 0


def cmd_combine(args) -> int:
    corpus = _load_corpus_arg(args.corpus)
    provider = None
    if args.vectors:
        provider = load_vectors(resolve_data_path(args.vectors))
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for sub in corpus.submissions:
            combined = combine_reviews(args.strategy, list(sub.reviews), provider)
            fh.write(json.dumps({
                "id": sub.id,
                "text": combined.text,
                "rating_prefix": combined.rating_prefix,
                "spans": [
                    {
                        "start": s.start,
                        "end": s.end,
                        "review_id": s.review_id,
                        "paragraph_index": s.paragraph_index,
                    }
                    for s in combined.spans
                ],
            }) + "\n")
    return 0


def cmd_generate(args) -> int:
    corpus = _load_corpus_arg(args.corpus)
    if args.model:
        model = load_model(resolve_data_path(args.model))
    else:
        train_subs = corpus.split(Split.TRAIN)
        if not train_subs:
            raise ValueError(
                "corpus has no train split; pass --model or run ingest first"
            )
        model = train(train_subs)
    assignment = (
        load_labels(resolve_data_path(args.labels), corpus) if args.labels else None
    )
    split = Split(args.split)
    records = run_split(
        corpus, split, args.engine, args.mode, args.combine, model,
        assignment=assignment,
    )
    write_records(records, args.out)
    if args.references_out:
        refs = references_for_split(corpus, split)
        with Path(args.references_out).open("w", encoding="utf-8") as fh:
            for ref in refs:
                fh.write(json.dumps(ref) + "\n")
    summary = {"records": len(records), "out": str(args.out)}
    if args.mode == "sent-ctrl":
        summary["structure_compliance"] = structure_compliance(records)
    print(json.dumps(summary))
    return 0


def cmd_generic(args) -> int:
    if args.action in ("build", "run") and not args.corpus:
        raise ValueError(f"generic {args.action} requires --corpus")
    if args.action in ("build", "run") and not args.out:
        raise ValueError(f"generic {args.action} requires --out")
    if args.action in ("assemble", "run") and not args.bank:
        raise ValueError(f"generic {args.action} requires --bank")
    if args.action == "assemble" and not args.control:
        raise ValueError("generic assemble requires --control")
    if args.action == "build":
        corpus = _load_corpus_arg(args.corpus)
        subs = corpus.split(Split.TRAIN) or list(corpus.submissions)
        model = None
        labels = None
        if args.side == "source":
            if args.labels:
                labels = load_labels(resolve_data_path(args.labels), corpus)
            if args.model:
                model = load_model(resolve_data_path(args.model))
            elif not args.labels:
                model = train(subs)
        bank = build_generic_bank(
            subs, args.side, args.filter, tagger_model=model, labels=labels
        )
        save_bank(bank, args.out)
        print(json.dumps({
            "side": bank.side,
            "filter": bank.score_filter,
            "category_sizes": {
                l.value: len(v) for l, v in bank.categories.items()
            },
        }))
        return 0
    bank = load_bank(resolve_data_path(args.bank))
    if args.action == "assemble":
        control = ControlSequence(
            tuple(parse_label(x) for x in args.control.split("|")),
            Granularity.SENT,
        )
        result = assemble_generic(bank, control)
        print(json.dumps({
            "text": result.text,
            "labels": [l.value for l in result.labels],
            "warnings": list(result.warnings),
        }))
        return 0
    # run: assemble along each gold control of a split, emit records
    corpus = _load_corpus_arg(args.corpus)
    from .control import sent_ctrl

    subs = corpus.split(Split(args.split))
    if not subs:
        raise ValueError(f"split {args.split!r} is empty")
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for sub in subs:
            control = sent_ctrl(sub.meta_review)
            result = assemble_generic(bank, control)
            fh.write(json.dumps({
                "id": sub.id,
                "control": [l.value for l in control.labels],
                "labels": [l.value for l in result.labels],
                "text": result.text,
                "warnings": list(result.warnings),
            }) + "\n")
    print(json.dumps({"records": len(subs), "out": str(args.out)}))
    return 0


def cmd_evaluate(args) -> int:
    outputs = read_outputs(resolve_data_path(args.outputs))
    references = read_references(resolve_data_path(args.references))
    report = evaluate_run(outputs, references)
    if args.report == "csv":
        _write_or_print(report_to_csv(report), args.path)
    else:
        _write_or_print(report_to_json(report), args.path)
    return 0


def cmd_attn(args) -> int:
    from .attnmap import attribution_payload, read_boundaries, read_tensor

    tensor = read_tensor(resolve_data_path(args.tensor))
    src, tgt = read_boundaries(resolve_data_path(args.boundaries))
    payload = attribution_payload(tensor, src, tgt, k=args.k)
    _write_or_print(json.dumps(payload, indent=2), args.path)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(
        resolve_data_path(args.corpus),
        resolve_data_path(args.model),
        bind=args.bind,
        static_dir=args.static,
    )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mred",
        description="structure-controllable meta-review generation toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("harvest", help="fetch raw records for one year")
    p.add_argument("--config", required=True)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("ingest", help="normalize raw dumps into a corpus file")
    p.add_argument("--raw", nargs="+", required=True)
    p.add_argument("--year", type=int, default=0,
                   help="fallback year for records lacking one")
    p.add_argument("--out", required=True)
    p.add_argument("--min-words", type=int, default=20)
    p.add_argument("--max-words", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-split", action="store_true",
                   help="skip word-count filtering and splitting")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="corpus analytics reports")
    p.add_argument("report", choices=sorted(_STATS))
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", choices=("json", "csv", "svg"), default="json")
    p.add_argument("--path", help="write here instead of stdout")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("tag", help="train/apply/evaluate the sentence tagger")
    p.add_argument("action", choices=("train", "predict", "eval"))
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", default="tagger-model.json")
    p.add_argument("--labels", help="external label file (predict: merged in)")
    p.add_argument("--out", default="labels.jsonl", help="predict output path")
    p.add_argument("--split", default="test", help="eval split")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("combine", help="combine each submission's reviews")
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vectors", help="external paragraph vectors (merge)")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("generate", help="extractive generation over a split")
    p.add_argument("--engine", choices=sorted(ENGINES), required=True)
    p.add_argument("--mode", choices=("unctrl", "sent-ctrl"), required=True)
    p.add_argument("--combine", choices=STRATEGIES, required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--out", required=True)
    p.add_argument("--labels", help="external review-sentence labels")
    p.add_argument("--model", help="tagger model (default: train on the fly)")
    p.add_argument("--references-out", help="also write gold references here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("generic", help="generic-sentence banks and baselines")
    p.add_argument("action", choices=("build", "assemble", "run"))
    p.add_argument("--corpus", help="build/run: corpus file")
    p.add_argument("--side", choices=SIDES, default="target")
    p.add_argument("--filter", choices=SCORE_FILTERS, default="all")
    p.add_argument("--model", help="source side: tagger model")
    p.add_argument("--labels", help="source side: external labels")
    p.add_argument("--bank", help="assemble/run: bank file")
    p.add_argument("--control", help='assemble: e.g. "abstract | weakness | decision"')
    p.add_argument("--split", default="test", help="run: split to cover")
    p.add_argument("--out", help="build/run: output path")
    p.set_defaults(func=cmd_generic)

    p = sub.add_parser("evaluate", help="score outputs against references")
    p.add_argument("--outputs", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--report", choices=("json", "csv"), default="json")
    p.add_argument("--path", help="write here instead of stdout")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("attn", help="attention attribution from tensor files")
    p.add_argument("--tensor", required=True)
    p.add_argument("--boundaries", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--path", help="write here instead of stdout")
    p.set_defaults(func=cmd_attn)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--bind", help="host:port (default env MRED_BIND)")
    p.add_argument("--static", help="static UI directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # single-line machine-parsable failure
        message = " ".join(str(exc).split()) or exc.__class__.__name__
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

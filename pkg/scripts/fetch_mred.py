"""Fetch the released MReD peer-review data and build mred-raw.jsonl.

The acceptance suite replays published corpus statistics and therefore needs
the released dataset, which is not bundled here.  This script either
downloads the release repository as a tarball or reads an existing local
checkout, converts every per-submission record it can find into the raw
record shape consumed by ``mred ingest``:

    {"id": ..., "year": ..., "decision": ...,
     "reviews": [{"reviewer_id", "text", "rating", "confidence"}, ...],
     "meta_review": [{"text", "label"}, ...]}

and writes them to ``<out>/mred-raw.jsonl``.  It finishes by normalizing the
result and printing the corpus counts next to the published ones, so a bad
conversion is visible immediately.

    python3 scripts/fetch_mred.py --out ~/mred-data
    python3 scripts/fetch_mred.py --from-dir /path/to/checkout --out ~/mred-data

Then: export MRED_DATA_DIR=~/mred-data && python3 -m pytest tests/test_acceptance.py
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tarfile
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mred.corpus import filter_and_split  # noqa: E402
from mred.harvest import normalize_records  # noqa: E402

DEFAULT_TARBALL = (
    "https://codeload.github.com/Shen-Chenhui/MReD/tar.gz/refs/heads/master"
)

PUBLISHED = {
    "submissions": 7_089,
    "reviews": 23_675,
    "labeled_sentences": 45_929,
    "filtered_pairs": 6_693,
}

# Field aliases seen across peer-review dumps; keys are our canonical names.
ALIASES = {
    "id": ("id", "submission_id", "paper_id", "forum", "number"),
    "year": ("year", "conference_year"),
    "decision": ("decision", "recommendation", "final_decision"),
    "reviews": ("reviews", "official_reviews", "review_list"),
    "meta_review": ("meta_review", "metareview", "meta-review", "meta"),
    "text": ("text", "sentence", "review", "comment", "content"),
    "label": ("label", "category", "intent"),
    "rating": ("rating", "score", "recommendation"),
    "confidence": ("confidence",),
    "reviewer_id": ("reviewer_id", "reviewer", "signature", "writer"),
}


def pick(record: dict, field: str):
    for alias in ALIASES[field]:
        if alias in record:
            return record[alias]
    return None


def looks_like_submission(record) -> bool:
    if not isinstance(record, dict):
        return False
    return (
        pick(record, "id") is not None
        and pick(record, "meta_review") is not None
        and pick(record, "reviews") is not None
    )


def to_raw(record: dict) -> dict:
    """Canonicalize one submission record; raise KeyError/TypeError on junk."""
    meta = pick(record, "meta_review")
    if isinstance(meta, dict):
        meta = pick(meta, "text") or meta.get("sentences")
    sentences = []
    for item in meta:
        if isinstance(item, str):
            raise TypeError("meta-review sentences carry no labels")
        sentences.append(
            {"text": pick(item, "text"), "label": pick(item, "label")}
        )
    reviews = []
    for i, rev in enumerate(pick(record, "reviews")):
        if isinstance(rev, str):
            rev = {"text": rev}
        reviews.append({
            "reviewer_id": pick(rev, "reviewer_id") or f"R{i + 1}",
            "text": pick(rev, "text"),
            "rating": pick(rev, "rating"),
            "confidence": pick(rev, "confidence"),
        })
    return {
        "id": str(pick(record, "id")),
        "year": pick(record, "year"),
        "decision": pick(record, "decision"),
        "reviews": reviews,
        "meta_review": sentences,
    }


def iter_json_payloads(root: Path):
    """Yield (path, parsed object) for every JSON/JSONL file under root."""
    for path in sorted(root.rglob("*")):
        if path.suffix.lower() not in (".json", ".jsonl") or not path.is_file():
            continue
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError:
            continue
        try:
            yield path, json.loads(text)
            continue
        except json.JSONDecodeError:
            pass
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError:
                rows = []
                break
        if rows:
            yield path, rows


def collect_submissions(root: Path) -> tuple[list[dict], list[str]]:
    found: dict[str, dict] = {}
    sources: list[str] = []
    for path, payload in iter_json_payloads(root):
        if isinstance(payload, dict):
            payload = list(payload.values())
        if not isinstance(payload, list):
            continue
        hits = 0
        for record in payload:
            if not looks_like_submission(record):
                continue
            try:
                raw = to_raw(record)
            except (KeyError, TypeError):
                continue
            found.setdefault(raw["id"], raw)
            hits += 1
        if hits:
            sources.append(f"{path.relative_to(root)} ({hits} records)")
    return list(found.values()), sources


def download_tarball(url: str, dest: Path) -> Path:
    import requests

    print(f"downloading {url} ...")
    resp = requests.get(url, timeout=120)
    resp.raise_for_status()
    with tarfile.open(fileobj=io.BytesIO(resp.content), mode="r:gz") as tar:
        tar.extractall(dest)
    children = [p for p in dest.iterdir() if p.is_dir()]
    return children[0] if len(children) == 1 else dest


def report_counts(records: list[dict]) -> bool:
    corpus, report = normalize_records(records, 0)
    got = {
        "submissions": len(corpus),
        "reviews": corpus.n_reviews,
        "labeled_sentences": corpus.n_labeled_sentences,
    }
    try:
        got["filtered_pairs"] = len(filter_and_split(corpus))
    except ValueError:
        got["filtered_pairs"] = 0
    if report.n_skipped:
        print(f"warning: {report.n_skipped} records skipped during normalization")
    ok = True
    for key, want in PUBLISHED.items():
        match = "OK " if got[key] == want else "DIFF"
        ok = ok and got[key] == want
        print(f"  {match} {key}: {got[key]} (published {want})")
    return ok


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--url", default=DEFAULT_TARBALL,
                        help="release tarball URL")
    parser.add_argument("--from-dir",
                        help="existing checkout/extract; skips the download")
    parser.add_argument("--out",
                        default=os.environ.get("MRED_DATA_DIR", "data"),
                        help="output directory (default: $MRED_DATA_DIR or ./data)")
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as scratch:
        if args.from_dir:
            root = Path(args.from_dir)
            if not root.is_dir():
                print(f"error: {root} is not a directory", file=sys.stderr)
                return 1
        else:
            try:
                root = download_tarball(args.url, Path(scratch))
            except Exception as exc:
                print(f"error: download failed: {exc}", file=sys.stderr)
                print("clone the release repository yourself and rerun with "
                      "--from-dir <checkout>", file=sys.stderr)
                return 1

        records, sources = collect_submissions(root)
        if not records:
            print("error: no per-submission records found under "
                  f"{root}", file=sys.stderr)
            print("expected JSON/JSONL records shaped like\n"
                  '  {"id", "year", "decision", "reviews": [...], '
                  '"meta_review": [{"text", "label"}, ...]}\n'
                  "convert the release by hand into that shape and point "
                  "MRED_DATA_DIR at the directory holding mred-raw.jsonl",
                  file=sys.stderr)
            return 1

        print("converted records from:")
        for line in sources:
            print(f"  {line}")

        out_path = out_dir / "mred-raw.jsonl"
        with out_path.open("w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        print(f"wrote {len(records)} records to {out_path}")

    matches = report_counts(records)
    if not matches:
        print("counts differ from the published statistics; "
              "the acceptance suite will say exactly where")
    print(f"next: export MRED_DATA_DIR={out_dir} && "
          "python3 -m pytest tests/test_acceptance.py -v")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

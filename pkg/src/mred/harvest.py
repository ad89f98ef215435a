"""Harvesting client for an OpenReview-style records service.

The service pages submissions per year:

    GET {base_url}/records?invitation=<id>&offset=<k>&limit=<n>
      -> {"records": [...], "total": N}

Raw payloads are persisted verbatim for auditability; normalization into the
corpus format is a separate pass that drops submissions without a released
meta-review and skips records that do not match the expected schema.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from .corpus import (
    Corpus,
    Decision,
    LabeledSentence,
    MAX_YEAR,
    MIN_YEAR,
    MetaReview,
    Review,
    Submission,
    write_corpus,
)
from .labels import parse_label

log = logging.getLogger(__name__)


class HarvestError(RuntimeError):
    pass


class HarvestPreconditionError(HarvestError):
    pass


class HarvestTransportError(HarvestError):
    pass


@dataclass(frozen=True)
class HarvestConfig:
    base_url: str
    invitations: dict[int, str]
    max_in_flight: int = 4
    retries: int = 3
    backoff: float = 0.25
    page_size: int = 100
    timeout: float = 10.0

    def __post_init__(self):
        if self.max_in_flight < 1:
            raise HarvestError("max_in_flight must be >= 1")
        if self.page_size < 1:
            raise HarvestError("page_size must be >= 1")
        if self.retries < 0 or self.backoff < 0:
            raise HarvestError("retries and backoff must be non-negative")


def load_harvest_config(path: str | Path) -> HarvestConfig:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return HarvestConfig(
            base_url=str(payload["base_url"]).rstrip("/"),
            invitations={int(k): str(v) for k, v in payload["invitations"].items()},
            max_in_flight=int(payload.get("max_in_flight", 4)),
            retries=int(payload.get("retries", 3)),
            backoff=float(payload.get("backoff", 0.25)),
            page_size=int(payload.get("page_size", 100)),
            timeout=float(payload.get("timeout", 10.0)),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise HarvestError(f"bad harvest config: {exc}") from exc


def _get_page(
    config: HarvestConfig, invitation: str, offset: int, session: requests.Session
) -> dict:
    url = f"{config.base_url}/records"
    params = {"invitation": invitation, "offset": offset, "limit": config.page_size}
    last_error: Exception | None = None
    for attempt in range(config.retries + 1):
        if attempt:
            time.sleep(config.backoff * (2 ** (attempt - 1)))
        try:
            response = session.get(url, params=params, timeout=config.timeout)
            if response.status_code >= 500:
                last_error = HarvestTransportError(
                    f"server error {response.status_code} at offset {offset}"
                )
                continue
            response.raise_for_status()
            payload = response.json()
            if "records" not in payload or "total" not in payload:
                raise HarvestTransportError(
                    f"page at offset {offset} lacks records/total"
                )
            return payload
        except (requests.RequestException, ValueError) as exc:
            last_error = exc
    raise HarvestTransportError(
        f"giving up on offset {offset} after {config.retries + 1} attempts: "
        f"{last_error}"
    ) from last_error


def harvest(
    config: HarvestConfig, year: int, session: requests.Session | None = None
) -> list[dict]:
    """Fetch all raw records for one year, paging with bounded concurrency."""
    if year == 2017:
        raise HarvestPreconditionError(
            "meta-reviews are not released for 2017"
        )
    if not MIN_YEAR <= year <= MAX_YEAR:
        raise HarvestPreconditionError(
            f"year must be in [{MIN_YEAR}, {MAX_YEAR}], got {year}"
        )
    invitation = config.invitations.get(year)
    if invitation is None:
        raise HarvestError(f"no invitation id configured for {year}")
    session = session or requests.Session()
    first = _get_page(config, invitation, 0, session)
    total = int(first["total"])
    records = list(first["records"])
    offsets = list(range(config.page_size, total, config.page_size))
    if offsets:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            pages = pool.map(
                lambda o: _get_page(config, invitation, o, session), offsets
            )
            for page in pages:
                records.extend(page["records"])
    if len(records) != total:
        log.warning(
            "expected %d records for %d, received %d", total, year, len(records)
        )
    return records


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def _parse_score(value) -> int | None:
    """Accept 6, 6.0, or OpenReview-style "6: marginally above ..."."""
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return int(value)
    head = str(value).split(":", 1)[0].strip()
    return int(head) if head.lstrip("-").isdigit() else None


def _parse_decision(value) -> Decision | None:
    text = str(value or "").lower()
    if "accept" in text and "reject" not in text:
        return Decision.ACCEPT
    if "reject" in text:
        return Decision.REJECT
    return None


@dataclass(frozen=True)
class HarvestReport:
    year: int
    n_raw: int
    n_normalized: int
    n_dropped_no_meta: int
    n_skipped: int


def normalize_records(raw_records: list[dict], year: int) -> tuple[Corpus, HarvestReport]:
    """Raw payloads -> validated Corpus; drops and skips are counted.

    A submission must carry labeled meta-review sentences to survive; records
    without a meta-review are dropped (counted separately from schema drift,
    which covers everything else that fails to parse).
    """
    submissions: list[Submission] = []
    dropped = 0
    skipped = 0
    seen: set[str] = set()
    for raw in raw_records:
        meta_raw = raw.get("meta_review")
        if not meta_raw:
            dropped += 1
            continue
        try:
            sid = str(raw["id"])
            if sid in seen:
                raise ValueError(f"duplicate id {sid}")
            decision = _parse_decision(raw.get("decision"))
            if decision is None:
                raise ValueError(f"unparsable decision {raw.get('decision')!r}")
            if isinstance(meta_raw, dict):
                meta_raw = meta_raw.get("sentences")
            if not isinstance(meta_raw, list):
                raise ValueError("meta_review must be labeled sentences")
            meta = MetaReview(
                sentences=tuple(
                    LabeledSentence(str(s["text"]), parse_label(s["label"]))
                    for s in meta_raw
                ),
                decision=decision,
            )
            reviews = []
            for i, r in enumerate(raw.get("reviews") or []):
                reviews.append(Review(
                    reviewer_id=str(r.get("reviewer_id") or f"R{i + 1}"),
                    text=str(r["text"]),
                    rating=_parse_score(r.get("rating")),
                    confidence=_parse_score(r.get("confidence")),
                ))
            submissions.append(Submission(
                id=sid,
                year=int(raw.get("year") or year),
                reviews=tuple(reviews),
                meta_review=meta,
            ))
            seen.add(sid)
        except (KeyError, TypeError, ValueError) as exc:
            skipped += 1
            log.warning("skipping record %r: %s", raw.get("id"), exc)
    corpus = Corpus(submissions=tuple(submissions), provenance=f"harvest:{year}")
    report = HarvestReport(
        year=year,
        n_raw=len(raw_records),
        n_normalized=len(submissions),
        n_dropped_no_meta=dropped,
        n_skipped=skipped,
    )
    return corpus, report


def harvest_to_files(
    config: HarvestConfig,
    year: int,
    out_dir: str | Path,
    session: requests.Session | None = None,
) -> HarvestReport:
    """Fetch, persist raw records verbatim, and write the normalized corpus."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw_records = harvest(config, year, session=session)
    with (out_dir / f"raw-{year}.jsonl").open("w", encoding="utf-8") as fh:
        for rec in raw_records:
            fh.write(json.dumps(rec) + "\n")
    corpus, report = normalize_records(raw_records, year)
    write_corpus(corpus, out_dir / f"corpus-{year}.jsonl")
    return report

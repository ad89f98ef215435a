"""HTTP service: tagging, generation, evaluation, and corpus analytics.

All shared state (corpus, tagger model, engine config, precomputed
analytics) is immutable after startup, so concurrent requests are safe and
identical requests produce byte-identical responses.  Errors are JSON
{code, message}; request bodies are capped at 2 MB.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from ._kernels import active_backend
from .analytics import (
    category_distribution,
    report_payload as distribution_payload,
    transition_matrix,
    transition_payload,
)
from .combine import STRATEGIES, MissingRatingError, combine_reviews
from .control import ControlSequence, Granularity
from .corpus import Corpus, Review, Split, load_corpus, review_sentences
from .extract import ENGINES, EngineConfig
from .labels import UnknownLabelError, parse_label
from .metrics import MisalignedRunError, evaluate_run, fingerprint, metric_config
from .pipeline import PipelineError, generate_from_reviews
from .tagger import TaggerModel, load_model, predict

MAX_BODY_BYTES = 2 * 1024 * 1024

DEFAULT_BIND = "127.0.0.1:8235"


class ServiceError(Exception):
    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


class ReviewIn(BaseModel):
    text: str
    rating: int | None = None
    confidence: int | None = None
    reviewer_id: str | None = None


class TagTextIn(BaseModel):
    text: str


class GenerateIn(BaseModel):
    reviews: list[ReviewIn] = Field(min_length=1)
    engine: str = "textrank"
    combine: str = "concat"
    control: list[str] | None = None
    k: int | None = None


class EvaluateIn(BaseModel):
    outputs: list[dict]
    references: list[dict]


def _configuration(config: EngineConfig) -> dict:
    payload = metric_config()
    payload.update(
        engine_damping=config.damping,
        engine_tolerance=config.tolerance,
        engine_max_iterations=config.max_iterations,
        engine_mmr_lambda=config.mmr_lambda,
        engine_similarity=config.similarity,
        kernel_backend=active_backend(),
        version=__version__,
    )
    return payload


def create_app(
    corpus: Corpus,
    tagger_model: TaggerModel,
    config: EngineConfig | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    config = config or EngineConfig()
    app = FastAPI(title="mred", version=__version__, docs_url=None, redoc_url=None)

    configuration = _configuration(config)
    config_hash = fingerprint(configuration)
    # analytics are precomputed once; GET responses never vary
    stats_body = {
        "n_submissions": len(corpus),
        "n_reviews": corpus.n_reviews,
        "n_labeled_sentences": corpus.n_labeled_sentences,
        "splits": {
            split.value: len(corpus.split(split))
            for split in (Split.TRAIN, Split.VALIDATION, Split.TEST)
        },
        "categories": distribution_payload(category_distribution(corpus)),
        "config_hash": config_hash,
    }
    transition_body = dict(
        transition_payload(transition_matrix(corpus)), config_hash=config_hash
    )

    @app.middleware("http")
    async def _cap_and_stamp(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None and int(length) > MAX_BODY_BYTES:
            return JSONResponse(
                status_code=413,
                content={
                    "code": "payload_too_large",
                    "message": f"request body exceeds {MAX_BODY_BYTES} bytes",
                },
            )
        response = await call_next(request)
        response.headers["X-Config-Hash"] = config_hash
        return response

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        return JSONResponse(
            status_code=422,
            content={
                "code": "validation_error",
                "message": f"{where}: {first.get('msg', 'invalid request')}",
            },
        )

    @app.get("/v1/health")
    async def health():
        return {
            "status": "ok",
            "version": __version__,
            "corpus": corpus.provenance,
            "n_submissions": len(corpus),
            "kernel_backend": active_backend(),
            "config_hash": config_hash,
        }

    @app.get("/v1/corpus/stats")
    async def corpus_stats():
        return stats_body

    @app.get("/v1/corpus/transition")
    async def corpus_transition():
        return transition_body

    @app.post("/v1/tag")
    async def tag(payload: list[str] | TagTextIn):
        if isinstance(payload, TagTextIn):
            sentences = review_sentences(payload.text)
        else:
            sentences = [s for s in payload if s.strip()]
            if len(sentences) != len(payload):
                raise ServiceError("empty_sentence", "sentences must be nonempty")
        tagged = predict(tagger_model, sentences)
        return [
            {"text": s.text, "label": s.label.value, "confidence": s.confidence}
            for s in tagged.sentences
        ]

    @app.post("/v1/generate")
    async def generate(payload: GenerateIn):
        if payload.engine not in ENGINES:
            raise ServiceError(
                "unknown_engine",
                f"engine must be one of {sorted(ENGINES)}, got {payload.engine!r}",
            )
        if payload.combine not in STRATEGIES:
            raise ServiceError(
                "unknown_strategy",
                f"combine must be one of {list(STRATEGIES)}, got {payload.combine!r}",
            )
        if (payload.control is None) == (payload.k is None):
            raise ServiceError(
                "control_xor_k", "provide exactly one of control / k"
            )
        control = None
        if payload.control is not None:
            try:
                control = ControlSequence(
                    tuple(parse_label(l) for l in payload.control),
                    Granularity.SENT,
                )
            except UnknownLabelError as exc:
                raise ServiceError("unknown_label", str(exc)) from exc
            except ValueError as exc:
                raise ServiceError("bad_control", str(exc)) from exc
        if payload.k is not None and payload.k < 1:
            raise ServiceError("bad_k", "k must be >= 1")
        try:
            reviews = [
                Review(
                    reviewer_id=r.reviewer_id or f"R{i + 1}",
                    text=r.text,
                    rating=r.rating,
                    confidence=r.confidence,
                )
                for i, r in enumerate(payload.reviews)
            ]
            record = generate_from_reviews(
                reviews,
                engine=payload.engine,
                strategy=payload.combine,
                tagger_model=tagger_model,
                control=control,
                k=payload.k,
                config=config,
            )
        except MissingRatingError as exc:
            raise ServiceError("missing_rating", str(exc)) from exc
        except (PipelineError, ValueError) as exc:
            raise ServiceError("bad_request", str(exc)) from exc
        combined = combine_reviews(payload.combine, reviews)
        spans = _locate(combined.text, record.sentences)
        return {
            "text": record.text,
            "sentences": [
                {
                    "text": record.sentences[i],
                    "label": slot.label.value,
                    "fallback": slot.fallback,
                    "span": list(spans[i]),
                }
                for i, slot in enumerate(record.selected)
            ],
            "control": [l.value for l in record.control]
            if record.control is not None
            else None,
            "warnings": list(record.warnings),
            "config_hash": config_hash,
        }

    @app.post("/v1/evaluate")
    async def evaluate(payload: EvaluateIn):
        for rec in payload.outputs + payload.references:
            labels = rec.get("labels")
            if labels is not None:
                try:
                    rec["labels"] = [parse_label(l) for l in labels]
                except UnknownLabelError as exc:
                    raise ServiceError("unknown_label", str(exc)) from exc
        try:
            report = evaluate_run(payload.outputs, payload.references)
        except MisalignedRunError as exc:
            raise ServiceError("misaligned_run", str(exc)) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError("bad_request", f"malformed record: {exc}") from exc
        return {
            "r1": report.r1,
            "r2": report.r2,
            "rl": report.rl,
            "structure_sim_sent": report.structure_sim_sent,
            "structure_sim_seg": report.structure_sim_seg,
            "decision_correct": report.decision_correct,
            "n_instances": report.n_instances,
            "n_structured": report.n_structured,
            "config": configuration,
            "config_hash": config_hash,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def _locate(text: str, sentences) -> list[tuple[int, int]]:
    """Character spans of selected sentences within the combined text.

    Selection order may differ from document order, so each sentence is
    searched independently; duplicates resolve to their first occurrence.
    Merge reflows paragraph text, so a miss maps to the empty span.
    """
    spans: list[tuple[int, int]] = []
    for sent in sentences:
        start = text.find(sent)
        spans.append((start, start + len(sent)) if start >= 0 else (0, 0))
    return spans


def default_static_dir() -> Path | None:
    """frontend/dist relative to the repository root, when present."""
    root = Path(__file__).resolve().parents[2]
    candidate = root / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def serve(
    corpus_path: str | Path,
    model_path: str | Path,
    bind: str | None = None,
    static_dir: str | Path | None = None,
) -> None:
    """Load state, then block serving HTTP until interrupted."""
    import uvicorn

    corpus = load_corpus(corpus_path)
    model = load_model(model_path)
    app = create_app(
        corpus, model, static_dir=static_dir or default_static_dir()
    )
    bind = bind or os.environ.get("MRED_BIND") or DEFAULT_BIND
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise ServiceError(
            "bad_bind", f"bind must look like host:port, got {bind!r}"
        )
    uvicorn.run(app, host=host, port=int(port), log_level="warning")

"""Local HTTP service exposing the engine to the companion UI.

Localhost-only by default: this is an examiner's workstation tool. Reads
are concurrent; writes to one document are serialized by the store's
per-document lock. Built UI assets, when present, are served statically
under the same port.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import defaults
from .assessment import (
    assign_category,
    cscale_advisory,
    document_to_dict,
    new_assessment,
    rank_sources,
    whatif_diff,
)
from .context import EnvironmentProfile, load_profile, profile_from_dict, profile_to_dict
from .errors import EngineError, InvalidConfigError, NotFoundError, SchemaError
from .ingest import group_sources, map_to_kb, parse_timeline
from .knowledge_base import kb_to_dict, load_kb
from .report import diff_to_dict, render
from .rubric import load_rubric, rubric_to_dict, severity_of
from .storage import DocumentStore

_STATUS_BY_ERROR = {
    "not-found": 404,
    "unknown-source": 404,
    "invalid-category-for-factor": 422,
    "unknown-factor": 422,
    "unknown-category": 422,
    "unknown-format": 422,
    "empty-source-set": 422,
    "incomplete-assessment": 409,
    "rubric-version-mismatch": 409,
}

_REPORT_MEDIA_TYPES = {
    "markdown": "text/markdown; charset=utf-8",
    "html": "text/html; charset=utf-8",
    "json": "application/json",
}

# Capability inventory: every CLI subcommand has an HTTP route that covers
# the same capability, and the other way around. Checked by a parity test.
CAPABILITIES = (
    {"capability": "rubric-validate", "cli": "rubric validate", "http": ("GET", "/api/rubric")},
    {"capability": "kb-validate", "cli": "kb validate", "http": ("GET", "/api/kb/sources")},
    {"capability": "list-profiles", "cli": "assess new --profile <file>", "http": ("GET", "/api/profiles")},
    {"capability": "new-assessment", "cli": "assess new", "http": ("POST", "/api/assessments")},
    {"capability": "read-document", "cli": "report <doc> --format json", "http": ("GET", "/api/assessments/{doc_id}")},
    {"capability": "set-assignment", "cli": "assess set", "http": ("PUT", "/api/assessments/{doc_id}/assignments")},
    {"capability": "score", "cli": "score", "http": ("GET", "/api/assessments/{doc_id}/report")},
    {"capability": "rank", "cli": "rank", "http": ("GET", "/api/assessments/{doc_id}/rank")},
    {"capability": "whatif", "cli": "whatif", "http": ("POST", "/api/assessments/{doc_id}/whatif")},
    {"capability": "report", "cli": "report", "http": ("GET", "/api/assessments/{doc_id}/report")},
    {"capability": "cscale", "cli": "cscale", "http": ("POST", "/api/assessments/{doc_id}/cscale")},
    {"capability": "ingest", "cli": "ingest", "http": ("POST", "/api/ingest")},
    {"capability": "serve", "cli": "serve", "http": None},
)


@dataclass
class ServiceConfig:
    data_dir: str | Path
    listen_port: int = 8787
    kb_path: str | Path | None = None
    rubric_path: str | Path | None = None
    profiles_dir: str | Path | None = None
    ui_dir: str | Path | None = None
    cscale_threshold: int = 1

    def __post_init__(self):
        if self.cscale_threshold < 0:
            raise InvalidConfigError("cscale_threshold must be >= 0")
        for attr in ("kb_path", "rubric_path", "profiles_dir", "ui_dir"):
            value = getattr(self, attr)
            if value is not None and not Path(value).exists():
                raise InvalidConfigError(f"{attr} {value!r} does not exist")


class NewAssessmentBody(BaseModel):
    title: str = "Assessment"
    sources: list[str]
    profile: dict | None = None
    profile_name: str | None = None
    actor: str = "investigator"


class AssignmentBody(BaseModel):
    source: str
    factor: str
    category: str
    rationale: str = ""
    actor: str = "investigator"


class WhatIfBody(BaseModel):
    profile: dict | None = None
    profile_name: str | None = None


class CScaleBody(BaseModel):
    sources: list[str]
    threshold: int | None = None


class IngestBody(BaseModel):
    content: str
    format: str
    mapping: dict[str, str] | None = None


def _load_profiles(profiles_dir: Path | None) -> dict[str, EnvironmentProfile]:
    if profiles_dir is None:
        return defaults.shipped_profiles()
    profiles = {}
    for path in sorted(Path(profiles_dir).glob("*.json")):
        profiles[path.stem] = load_profile(path.read_bytes())
    return profiles


def create_app(config: ServiceConfig) -> FastAPI:
    if config.rubric_path is None:
        rubric = defaults.default_rubric()
    else:
        rubric = load_rubric(Path(config.rubric_path).read_bytes())
    if config.kb_path is None:
        kb = defaults.default_kb(rubric)
    else:
        kb = load_kb(Path(config.kb_path).read_bytes(), rubric)
    profiles = _load_profiles(Path(config.profiles_dir) if config.profiles_dir else None)
    store = DocumentStore(config.data_dir)

    app = FastAPI(title="tamperscore", docs_url=None, redoc_url=None)
    app.state.config = config

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        status = _STATUS_BY_ERROR.get(exc.name, 400)
        return JSONResponse(status_code=status, content={"error": exc.name, "detail": exc.detail})

    def resolve_profile(inline: dict | None, name: str | None) -> EnvironmentProfile:
        if inline is not None:
            return profile_from_dict(inline)
        if name is not None:
            if name not in profiles:
                raise NotFoundError(f"no profile named {name!r}")
            return profiles[name]
        raise SchemaError("request needs either an inline profile or a profile_name")

    @app.get("/api/rubric")
    def get_rubric():
        return rubric_to_dict(rubric)

    @app.get("/api/kb/sources")
    def get_kb_sources():
        payload = kb_to_dict(kb)
        payload["class_index"] = {cls: list(ids) for cls, ids in kb.class_index.items()}
        return payload

    @app.get("/api/profiles")
    def get_profiles():
        return {"profiles": [{"name": name, "profile": profile_to_dict(p)} for name, p in profiles.items()]}

    @app.post("/api/assessments", status_code=201)
    def post_assessment(body: NewAssessmentBody):
        profile = resolve_profile(body.profile, body.profile_name)
        doc = new_assessment(body.title, rubric, profile, kb, body.sources, actor=body.actor)
        store.save(doc)
        return {"id": doc.id, "document": document_to_dict(doc)}

    @app.get("/api/assessments/{doc_id}")
    def get_assessment(doc_id: str):
        return document_to_dict(store.load(doc_id))

    @app.put("/api/assessments/{doc_id}/assignments")
    def put_assignment(doc_id: str, body: AssignmentBody):
        with store.lock(doc_id):
            doc = store.load(doc_id)
            assign_category(doc, body.source, body.factor, body.category, body.rationale, rubric, actor=body.actor)
            store.save(doc)
        severity = severity_of(rubric, body.factor, body.category)
        return {
            "source": body.source,
            "factor": body.factor,
            "category": body.category,
            "severity": int(severity),
            "document": document_to_dict(doc),
        }

    @app.post("/api/assessments/{doc_id}/whatif")
    def post_whatif(doc_id: str, body: WhatIfBody):
        doc = store.load(doc_id)
        override = resolve_profile(body.profile, body.profile_name)
        return diff_to_dict(whatif_diff(doc, override, kb, rubric))

    @app.get("/api/assessments/{doc_id}/report")
    def get_report(doc_id: str, format: str = "json"):
        doc = store.load(doc_id)
        rendered = render(doc, rubric, format)
        return Response(content=rendered.body, media_type=_REPORT_MEDIA_TYPES[rendered.format])

    @app.get("/api/assessments/{doc_id}/rank")
    def get_rank(doc_id: str):
        doc = store.load(doc_id)
        ranked = rank_sources(doc, rubric)
        return {"rank": [{"rank": r.rank, "source": r.source, "profile": list(r.profile)} for r in ranked]}

    @app.post("/api/assessments/{doc_id}/cscale")
    def post_cscale(doc_id: str, body: CScaleBody):
        doc = store.load(doc_id)
        threshold = config.cscale_threshold if body.threshold is None else body.threshold
        advisory = cscale_advisory(doc, rubric, body.sources, threshold=threshold)
        return {
            "resistant_count": advisory.resistant_count,
            "non_resistant_count": advisory.non_resistant_count,
            "advisory_text": advisory.advisory_text,
            "threshold": advisory.threshold,
            "sources": [
                {
                    "source": s.source,
                    "weakness_factors": list(s.weakness_factors),
                    "resistant": s.resistant,
                }
                for s in advisory.sources
            ],
        }

    @app.post("/api/ingest")
    def post_ingest(body: IngestBody):
        parsed = parse_timeline(body.content, body.format)
        occurrences = group_sources(parsed.entries)
        mapping = body.mapping if body.mapping is not None else defaults.default_mapping()
        result = map_to_kb(occurrences, mapping, kb)
        return {
            "occurrences": [
                {"source_type": o.source_type, "count": o.count, "sample_paths": list(o.sample_paths)}
                for o in occurrences
            ],
            "mapped": list(result.mapped),
            "unmapped": list(result.unmapped),
            "rejected_rows": len(parsed.rejects),
        }

    if config.ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(config.ui_dir), html=True), name="ui")

    return app


def serve(config: ServiceConfig):
    """Run the service until shutdown; localhost only."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.listen_port, log_level="warning")

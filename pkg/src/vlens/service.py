"""HTTP front door: JSON session API over one catalog.

The running service holds an immutable snapshot (catalog, materialized
viewpoints, orchestrator). Mutating endpoints build a new catalog, persist
it, then swap the snapshot atomically; sessions stay bound to the snapshot
they were opened on, so an ingest never changes the ground under a running
seek. Item and relationship data stays XML at rest; the wire format here
is JSON only. Errors share one envelope: {"error": code, "detail": text}.
"""

from __future__ import annotations

import os
import threading
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .catalog import Catalog, save_catalog
from .errors import (
    SchemaViolationError,
    UnknownActorError,
    UnknownSessionError,
    UnknownViewpointError,
    VlensError,
)
from .fusion import MergedResult
from .model import InformationItem, ItemKind, RelKind
from .orchestrator import Orchestrator, QueryStep, Session, TransitionStep
from .ppco_xml import parse_ppco
from .transition import MappingOrigin, TransitionMapping, TranslatedQuery, mine_mappings
from .viewpoint import (
    AttrEquals,
    KindIs,
    Query,
    ReachableFrom,
    Viewpoint,
    ViewpointSpec,
    tokenize,
)

_STATUS_BY_CODE = {
    "MalformedXml": 422,
    "SchemaViolation": 422,
    "GraphInvalid": 422,
    "InvalidQuery": 422,
    "UnknownAttributeInFilter": 422,
    "UnknownActor": 404,
    "UnknownViewpoint": 404,
    "UnknownSession": 404,
    "UnknownItem": 404,
    "AnchorNotInLastResult": 409,
    "NoQuerySubmitted": 409,
    "IoError": 500,
}


class ServiceState:
    """Current snapshot plus the session-to-snapshot binding table."""

    def __init__(self, catalog: Catalog, catalog_path: str | os.PathLike | None = None):
        self.lock = threading.RLock()
        self.catalog_path = None if catalog_path is None else os.fspath(catalog_path)
        self.homes: dict[str, Orchestrator] = {}
        self.catalog: Catalog = catalog
        self.viewpoints: dict[str, Viewpoint] = {}
        self.orchestrator: Orchestrator | None = None
        self.swap(catalog)

    def swap(self, catalog: Catalog) -> None:
        """Install a new snapshot. Persistence happens first, so a write
        failure leaves the running state untouched."""
        with self.lock:
            viewpoints = catalog.materialize()
            orchestrator = Orchestrator(catalog.graph, viewpoints, catalog.mappings)
            if self.catalog_path is not None:
                save_catalog(catalog, self.catalog_path)
            self.catalog = catalog
            self.viewpoints = viewpoints
            self.orchestrator = orchestrator

    def home(self, session_id: str) -> Orchestrator:
        try:
            return self.homes[session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session: {session_id!r}") from None


# ------------------------------------------------------------- request bodies

class FilterBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: str | None = None
    attr: str | None = None
    value: str | None = None
    reachable_from: str | None = None
    via: str | None = None


class ViewpointBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    actor: str
    context: str = ""
    importance: float
    filters: list[FilterBody] = []
    field_weights: dict[str, float] = {}


class SessionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    actor: str
    viewpoints: list[str]


class QueryBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    terms: list[str]
    k: int | None = Field(default=None, ge=1)


class TransitionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    target_vp: str
    anchor: str | None = None


class MineBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source_vp: str
    target_vp: str
    min_confidence: float = Field(gt=0.0, le=1.0)


# --------------------------------------------------------------- serializers

def _query_json(q: Query | None) -> dict | None:
    if q is None:
        return None
    out: dict[str, Any] = {"terms": list(q.terms)}
    if q.kind is not None:
        out["kind"] = q.kind.value
    if q.attrs:
        out["attrs"] = dict(q.attrs)
    return out


def _merged_json(m: MergedResult) -> dict:
    return {
        "ranked": [
            {
                "rank": rank,
                "item_id": row.item_id,
                "fused_score": row.fused_score,
                "provenance": [
                    {
                        "viewpoint_id": p.viewpoint_id,
                        "raw_score": p.raw_score,
                        "drift": p.drift,
                    }
                    for p in row.provenance
                ],
            }
            for rank, row in enumerate(m.ranked, start=1)
        ]
    }


def _translated_json(tq: TranslatedQuery) -> dict:
    return {
        "strategy": tq.strategy.value,
        "query": _query_json(tq.query),
        "original": _query_json(tq.original),
        "applied_rules": [
            {"from": r.source, "to": list(r.targets), "confidence": r.confidence}
            for r in tq.applied_rules
        ],
    }


def _mapping_json(m: TransitionMapping) -> dict:
    return {
        "source_vp": m.source_vp,
        "target_vp": m.target_vp,
        "origin": m.origin.value,
        "rules": [
            {"from": r.source, "to": list(r.targets), "confidence": r.confidence}
            for r in m.rules
        ],
    }


def _step_json(step: QueryStep | TransitionStep) -> dict:
    if isinstance(step, QueryStep):
        return {
            "type": "query",
            "at": step.at.isoformat(),
            "query": _query_json(step.query),
            "selected": list(step.selected),
            "result": _merged_json(step.result),
        }
    return {
        "type": "transition",
        "at": step.at.isoformat(),
        "target_vp": step.target_vp,
        "anchor": step.anchor,
        "proposal": _translated_json(step.proposal),
    }


def _session_json(s: Session) -> dict:
    return {
        "session_id": s.id,
        "actor": s.actor,
        "active_viewpoints": list(s.active_viewpoints),
        "original_query": _query_json(s.original_query),
        "history": [_step_json(step) for step in s.history],
    }


def _viewpoint_row(vp: Viewpoint) -> dict:
    return {
        "id": vp.spec.id,
        "actor": vp.spec.actor,
        "context": vp.spec.context,
        "importance": vp.spec.importance,
        "domain_size": len(vp.items),
    }


def _item_json(item: InformationItem, relationships) -> dict:
    return {
        "id": item.id,
        "kind": item.kind.value,
        "name": item.name,
        "attributes": dict(sorted(item.attributes.items())),
        "description": item.description,
        "relationships": [
            {
                "source": r.source,
                "target": r.target,
                "kind": r.kind.value,
                "weight": r.weight,
            }
            for r in relationships
        ],
    }


# ----------------------------------------------------------------- conversion

def _to_enum(enum_cls, raw: str, where: str):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = "|".join(k.value for k in enum_cls)
        raise SchemaViolationError(where, f"expected one of {allowed}, got {raw!r}") from None


def _clause_from_body(f: FilterBody, where: str):
    given = {
        name
        for name in ("kind", "attr", "value", "reachable_from", "via")
        if getattr(f, name) is not None
    }
    if given == {"kind"}:
        return KindIs(_to_enum(ItemKind, f.kind, where))
    if given == {"attr", "value"}:
        return AttrEquals(f.attr, f.value)
    if given == {"reachable_from", "via"}:
        return ReachableFrom(f.reachable_from, _to_enum(RelKind, f.via, where))
    raise SchemaViolationError(
        where,
        "expected keys (kind) or (attr, value) or (reachable_from, via), "
        f"got ({', '.join(sorted(given))})",
    )


def spec_from_body(body: ViewpointBody) -> ViewpointSpec:
    clauses = tuple(
        _clause_from_body(f, f"filters[{i}]") for i, f in enumerate(body.filters)
    )
    try:
        return ViewpointSpec(
            id=body.id,
            actor=body.actor,
            context=body.context,
            importance=body.importance,
            domain_filter=clauses,
            field_weights=body.field_weights,
        )
    except ValueError as exc:
        raise SchemaViolationError("viewpoint", str(exc)) from None


def _query_from_body(body: QueryBody) -> Query:
    # raw strings are normalized here so clients can send text verbatim
    terms = tuple(t for raw in body.terms for t in tokenize(raw))
    return Query(terms=terms)


# ------------------------------------------------------------------------ app

def create_app(catalog: Catalog, catalog_path: str | os.PathLike | None = None) -> FastAPI:
    state = ServiceState(catalog, catalog_path)
    app = FastAPI(title="vlens", docs_url=None, redoc_url=None)
    app.state.vlens = state
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(VlensError)
    def on_domain_error(request: Request, exc: VlensError) -> JSONResponse:
        status = _STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(status_code=status, content={"error": exc.code, "detail": exc.message})

    @app.exception_handler(RequestValidationError)
    def on_request_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        detail = "; ".join(
            f"{'.'.join(str(p) for p in err.get('loc', ()))}: {err.get('msg', '')}"
            for err in exc.errors()
        )
        return JSONResponse(status_code=422, content={"error": "ValidationError", "detail": detail})

    @app.post("/ingest")
    async def ingest(request: Request) -> dict:
        graph = parse_ppco(await request.body())
        with state.lock:
            try:
                state.swap(Catalog(graph, state.catalog.specs, state.catalog.mappings))
            except ValueError as exc:
                raise SchemaViolationError("/catalog", str(exc)) from None
        return {"items": len(graph.items), "relationships": len(graph.relationships)}

    @app.get("/viewpoints")
    def list_viewpoints() -> list:
        vps = state.viewpoints
        return [_viewpoint_row(vps[vp_id]) for vp_id in sorted(vps)]

    @app.post("/viewpoints", status_code=201)
    def add_viewpoint(body: ViewpointBody) -> dict:
        spec = spec_from_body(body)
        with state.lock:
            owner = state.catalog.graph.by_id.get(spec.actor)
            if owner is None or owner.kind is not ItemKind.ACTOR:
                raise UnknownActorError(f"unknown actor: {spec.actor!r}")
            cat = state.catalog
            try:
                state.swap(Catalog(cat.graph, cat.specs + (spec,), cat.mappings))
            except ValueError as exc:
                raise SchemaViolationError("/catalog", str(exc)) from None
            return _viewpoint_row(state.viewpoints[spec.id])

    @app.post("/mappings/mine")
    def mine(body: MineBody) -> dict:
        with state.lock:
            vps = state.viewpoints
            for vp_id in (body.source_vp, body.target_vp):
                if vp_id not in vps:
                    raise UnknownViewpointError(f"unknown viewpoint: {vp_id!r}")
            mined = mine_mappings(vps[body.source_vp], vps[body.target_vp], body.min_confidence)
            cat = state.catalog
            kept = tuple(
                m
                for m in cat.mappings
                if not (
                    m.origin is MappingOrigin.MINED
                    and m.source_vp == mined.source_vp
                    and m.target_vp == mined.target_vp
                )
            )
            if mined.rules:
                kept = kept + (mined,)
            if kept != cat.mappings:
                state.swap(Catalog(cat.graph, cat.specs, kept))
        return _mapping_json(mined)

    @app.post("/sessions")
    def open_session(body: SessionBody) -> dict:
        with state.lock:
            orchestrator = state.orchestrator
            session = orchestrator.open_session(body.actor, body.viewpoints)
            state.homes[session.id] = orchestrator
        return {
            "session_id": session.id,
            "actor": session.actor,
            "active_viewpoints": list(session.active_viewpoints),
        }

    @app.post("/sessions/{session_id}/query")
    def submit_query(session_id: str, body: QueryBody) -> dict:
        orchestrator = state.home(session_id)
        q = _query_from_body(body)
        merged = orchestrator.submit_query(session_id, q, k=body.k)
        session = orchestrator.session(session_id)
        step = next(
            st
            for st in reversed(session.history)
            if isinstance(st, QueryStep) and st.result is merged
        )
        return {
            "session_id": session_id,
            "query": _query_json(q),
            "selected": list(step.selected),
            **_merged_json(merged),
        }

    @app.post("/sessions/{session_id}/transition")
    def transition(session_id: str, body: TransitionBody) -> dict:
        orchestrator = state.home(session_id)
        proposal = orchestrator.transition(session_id, body.target_vp, anchor=body.anchor)
        session = orchestrator.session(session_id)
        return {
            "session_id": session_id,
            "active_viewpoints": list(session.active_viewpoints),
            **_translated_json(proposal),
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        orchestrator = state.home(session_id)
        return _session_json(orchestrator.session(session_id))

    @app.get("/items/{item_id}")
    def get_item(item_id: str) -> dict:
        graph = state.catalog.graph
        item = graph.item(item_id)
        rels = sorted(
            (r for r in graph.relationships if item_id in (r.source, r.target)),
            key=lambda r: (r.source, r.target, r.kind.value),
        )
        return _item_json(item, rels)

    @app.get("/health")
    def health() -> dict:
        return {
            "items": len(state.catalog.graph.items),
            "viewpoints": len(state.viewpoints),
        }

    return app


def serve(
    catalog: Catalog,
    port: int,
    catalog_path: str | os.PathLike | None = None,
    host: str = "127.0.0.1",
) -> None:
    """Run the service until interrupted. The socket is bound here, before
    uvicorn takes over, so a taken port surfaces as a plain OSError."""
    import socket

    import uvicorn

    app = create_app(catalog, catalog_path)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError:
        sock.close()
        raise
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    uvicorn.Server(config).run(sockets=[sock])

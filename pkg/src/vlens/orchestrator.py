"""Multi-viewpoint seek sessions.

A session binds an actor, an ordered set of active viewpoints, the first
query submitted (the drift reference), and an append-only history. Each
submission selects viewpoints worth consulting, carries the query into each
one (rewriting through the catalog mapping whose source is the session's
first active viewpoint), evaluates, and fuses with reliability = viewpoint
importance. Transitions move another viewpoint to the front, proposing a
query that keeps the seek's context: an intersection entry through an
anchor item when possible, a rule rewrite or identity carry-over of the
last query otherwise.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Mapping, Union

from .errors import (
    AnchorNotInLastResultError,
    NoQuerySubmittedError,
    NotInIntersectionError,
    UnknownActorError,
    UnknownSessionError,
    UnknownViewpointError,
)
from .fusion import FusionEntry, FusionInput, MergedResult, drift_similarity, merge
from .model import ItemKind, PPCOGraph
from .transition import (
    Strategy,
    TransitionMapping,
    TranslatedQuery,
    effective_mapping,
    entry_points,
    translate,
)
from .viewpoint import Query, Viewpoint, evaluate


@dataclass(frozen=True)
class QueryStep:
    at: datetime
    query: Query
    selected: tuple[str, ...]
    result: MergedResult


@dataclass(frozen=True)
class TransitionStep:
    at: datetime
    target_vp: str
    anchor: str | None
    proposal: TranslatedQuery


Step = Union[QueryStep, TransitionStep]


@dataclass
class Session:
    """Mutable seek state; steps themselves are immutable once appended."""

    id: str
    actor: str
    active_viewpoints: tuple[str, ...]
    original_query: Query | None = None
    history: list[Step] = field(default_factory=list)

    def last_query(self) -> Query | None:
        for step in reversed(self.history):
            if isinstance(step, QueryStep):
                return step.query
        return None

    def last_result(self) -> MergedResult | None:
        for step in reversed(self.history):
            if isinstance(step, QueryStep):
                return step.result
        return None


def select_collections(q: Query, vps: list[Viewpoint], k: int) -> list[str]:
    """Top-k viewpoints by document-frequency overlap with the query:
    goodness(vp) = sum over query terms of df(term) / |domain|. Ties fall
    to ascending viewpoint id; empty domains score zero."""
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")

    def goodness(vp: Viewpoint) -> float:
        size = len(vp.items)
        if size == 0:
            return 0.0
        return sum(vp.df(t) / size for t in q.terms)

    ranked = sorted(vps, key=lambda vp: (-goodness(vp), vp.spec.id))
    return [vp.spec.id for vp in ranked[: min(k, len(vps))]]


def _identity(q: Query) -> TranslatedQuery:
    return TranslatedQuery(
        query=q, original=q, applied_rules=(), strategy=Strategy.IDENTITY_FALLBACK
    )


class Orchestrator:
    """Session registry over one immutable snapshot of graph, viewpoints,
    and mappings. Per-session operations are serialized; a replaced snapshot
    never disturbs sessions opened on an older orchestrator."""

    def __init__(
        self,
        graph: PPCOGraph,
        viewpoints: Mapping[str, Viewpoint],
        mappings: Iterable[TransitionMapping] = (),
    ):
        self.graph = graph
        self.viewpoints = dict(viewpoints)
        self.mappings = tuple(mappings)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.Lock()

    # ------------------------------------------------------------- sessions

    def open_session(self, actor: str, viewpoint_ids: list[str]) -> Session:
        item = self.graph.by_id.get(actor)
        if item is None or item.kind is not ItemKind.ACTOR:
            raise UnknownActorError(f"unknown actor: {actor!r}")
        if not viewpoint_ids:
            raise UnknownViewpointError("session needs at least one viewpoint")
        ordered: list[str] = []
        for vp_id in viewpoint_ids:
            if vp_id not in self.viewpoints:
                raise UnknownViewpointError(f"unknown viewpoint: {vp_id!r}")
            if vp_id not in ordered:
                ordered.append(vp_id)
        session = Session(
            id=uuid.uuid4().hex, actor=actor, active_viewpoints=tuple(ordered)
        )
        with self._registry_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.RLock()
        return session

    def session(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session: {session_id!r}") from None

    # ------------------------------------------------------------ operations

    def submit_query(
        self, session_id: str, q: Query, k: int | None = None
    ) -> MergedResult:
        session = self.session(session_id)
        with self._locks[session_id]:
            if session.original_query is None:
                session.original_query = q
            active = [self.viewpoints[v] for v in session.active_viewpoints]
            selected = select_collections(q, active, k if k is not None else len(active))
            first_active = session.active_viewpoints[0]
            entries = []
            for vp_id in selected:
                vp = self.viewpoints[vp_id]
                mapping = effective_mapping(self.mappings, first_active, vp_id)
                tq = translate(mapping, q) if mapping is not None else _identity(q)
                results = evaluate(vp, tq.query)
                drift = drift_similarity(session.original_query, tq.query)
                entries.append(
                    FusionEntry(
                        results=results, reliability=vp.spec.importance, drift=drift
                    )
                )
            merged = merge(FusionInput(entries=tuple(entries)))
            session.history.append(
                QueryStep(
                    at=datetime.now(timezone.utc),
                    query=q,
                    selected=tuple(selected),
                    result=merged,
                )
            )
            return merged

    def transition(
        self, session_id: str, target_vp: str, anchor: str | None = None
    ) -> TranslatedQuery:
        session = self.session(session_id)
        if target_vp not in self.viewpoints:
            raise UnknownViewpointError(f"unknown viewpoint: {target_vp!r}")
        with self._locks[session_id]:
            first_active = session.active_viewpoints[0]
            last_query = session.last_query()

            proposal: TranslatedQuery | None = None
            if anchor is not None:
                last = session.last_result()
                if last is None or anchor not in last:
                    raise AnchorNotInLastResultError(
                        f"anchor {anchor!r} is not in the latest merged result"
                    )
                try:
                    tq = entry_points(
                        self.viewpoints[first_active], self.viewpoints[target_vp], anchor
                    )
                    # the entry query still chases the seek's previous context
                    proposal = replace(tq, original=last_query or tq.original)
                except NotInIntersectionError:
                    proposal = None  # fall back to rewriting the last query

            if proposal is None:
                if last_query is None:
                    raise NoQuerySubmittedError(
                        "transition needs a submitted query or a usable anchor"
                    )
                mapping = effective_mapping(self.mappings, first_active, target_vp)
                proposal = (
                    translate(mapping, last_query)
                    if mapping is not None
                    else _identity(last_query)
                )

            session.active_viewpoints = (target_vp,) + tuple(
                v for v in session.active_viewpoints if v != target_vp
            )
            session.history.append(
                TransitionStep(
                    at=datetime.now(timezone.utc),
                    target_vp=target_vp,
                    anchor=anchor,
                    proposal=proposal,
                )
            )
            return proposal

"""Single viewpoints: an actor-scoped domain subset plus its access method.

A ViewpointSpec names an actor, a context label, an importance, a domain
filter (conjunction of clauses), and per-field weights. Materializing it
against a graph fixes the domain and builds an inverted term index over
name, description, and attribute values; evaluate() then maps queries to
ranked subsets of that domain and nothing outside it.

Scoring: score(item) = sum over query terms of fw(field) * tf * idf(term),
with idf(t) = ln(1 + |domain| / df(t)) and df counted inside the viewpoint's
own domain, so each viewpoint is statistically self-contained.
"""

from __future__ import annotations

import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Union

from .errors import EmptyDomainWarning, InvalidQueryError, UnknownAttributeInFilterError
from .model import InformationItem, ItemKind, PPCOGraph, RelKind, UNDIRECTED_KINDS

FIELDS = ("name", "description", "attributes")

_TOKEN = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on any non-alphanumeric rune; underscores split
    too. No stemming, no stop words."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class KindIs:
    kind: ItemKind


@dataclass(frozen=True)
class AttrEquals:
    name: str
    value: str


@dataclass(frozen=True)
class ReachableFrom:
    """Items reachable from root (root included) following edges of the given
    kind; directed kinds are walked source-to-target only."""

    root: str
    via: RelKind


FilterClause = Union[KindIs, AttrEquals, ReachableFrom]


@dataclass(frozen=True)
class ViewpointSpec:
    """Declarative description of a viewpoint; materialization makes it live."""

    id: str
    actor: str
    context: str
    importance: float
    domain_filter: tuple[FilterClause, ...] = ()
    field_weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("viewpoint id must be non-empty")
        if not 0.0 <= float(self.importance) <= 1.0:
            raise ValueError(f"importance must lie in [0,1], got {self.importance!r}")
        object.__setattr__(self, "importance", float(self.importance))
        object.__setattr__(self, "domain_filter", tuple(self.domain_filter))
        weights = {f: 1.0 for f in FIELDS}
        for name, value in dict(self.field_weights).items():
            if name not in FIELDS:
                raise ValueError(f"unknown field {name!r}, expected one of {FIELDS}")
            value = float(value)
            if not value > 0.0:
                raise ValueError(f"field weight for {name!r} must be positive")
            weights[name] = value
        object.__setattr__(self, "field_weights", weights)


@dataclass(frozen=True)
class Query:
    """Normalized term multiset plus optional kind/attribute constraints."""

    terms: tuple[str, ...]
    kind: ItemKind | None = None
    attrs: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "attrs", dict(self.attrs))
        if not self.terms:
            raise InvalidQueryError("query needs at least one term")
        for t in self.terms:
            if not t or tokenize(t) != [t]:
                raise InvalidQueryError(f"term {t!r} is not a normalized token")

    @classmethod
    def from_text(cls, text: str, **kw) -> "Query":
        return cls(terms=tuple(tokenize(text)), **kw)


@dataclass(frozen=True)
class ResultSet:
    """Ranked hits of one query against one viewpoint. Scores are positive;
    zero-score items are omitted; order is score descending, then item id."""

    viewpoint_id: str
    query: Query
    hits: tuple[tuple[str, float], ...]

    def item_ids(self) -> list[str]:
        return [item_id for item_id, _ in self.hits]


# postings: term -> item id -> field -> term frequency
Postings = Mapping[str, Mapping[str, Mapping[str, int]]]


@dataclass(frozen=True)
class Viewpoint:
    """A materialized viewpoint: fixed domain, inverted index, vocabulary."""

    spec: ViewpointSpec
    items: Mapping[str, InformationItem]
    postings: Postings

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self.items)

    @property
    def vocabulary(self) -> frozenset[str]:
        return frozenset(self.postings)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        df = self.df(term)
        if df == 0:
            return 0.0
        return math.log(1.0 + len(self.items) / df)

    def term_scores_for(self, item_id: str) -> dict[str, float]:
        """Weighted tf*idf of every term indexed for one domain item; the
        discriminative-term source for intersection entry points."""
        scores: dict[str, float] = {}
        for term, by_item in self.postings.items():
            fields = by_item.get(item_id)
            if not fields:
                continue
            idf = self.idf(term)
            scores[term] = sum(
                self.spec.field_weights[f] * tf * idf for f, tf in sorted(fields.items())
            )
        return scores


def _item_field_tokens(item: InformationItem) -> dict[str, list[str]]:
    attr_tokens: list[str] = []
    for name in sorted(item.attributes):
        attr_tokens.extend(tokenize(item.attributes[name]))
    return {
        "name": tokenize(item.name),
        "description": tokenize(item.description),
        "attributes": attr_tokens,
    }


def _reachable(graph: PPCOGraph, root: str, via: RelKind) -> set[str]:
    seen = {root} if root in graph else set()
    frontier = list(seen)
    while frontier:
        node = frontier.pop()
        for rel_ in graph.edges_at(node, via):
            if rel_.source == node:
                nxt = rel_.target
            elif via in UNDIRECTED_KINDS:
                nxt = rel_.source
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _matches(item: InformationItem, clause: FilterClause, reach: Mapping[ReachableFrom, set[str]]) -> bool:
    if isinstance(clause, KindIs):
        return item.kind is clause.kind
    if isinstance(clause, AttrEquals):
        return item.attributes.get(clause.name) == clause.value
    return item.id in reach[clause]


def materialize_viewpoint(spec: ViewpointSpec, graph: PPCOGraph) -> Viewpoint:
    """Fix the domain (items satisfying every filter clause) and index it.

    Warns EmptyDomainWarning when the filter selects nothing; raises
    UnknownAttributeInFilterError when an attribute clause names an attribute
    no graph item carries.
    """
    known_attrs = graph.attribute_names()
    reach: dict[ReachableFrom, set[str]] = {}
    for clause in spec.domain_filter:
        if isinstance(clause, AttrEquals) and clause.name not in known_attrs:
            raise UnknownAttributeInFilterError(
                f"filter of {spec.id!r} references unknown attribute {clause.name!r}"
            )
        if isinstance(clause, ReachableFrom):
            reach[clause] = _reachable(graph, clause.root, clause.via)

    domain_items = {
        item.id: item
        for item in sorted(graph.items, key=lambda i: i.id)
        if all(_matches(item, c, reach) for c in spec.domain_filter)
    }
    if not domain_items:
        warnings.warn(
            f"viewpoint {spec.id!r}: domain filter selects no items",
            EmptyDomainWarning,
            stacklevel=2,
        )

    postings: dict[str, dict[str, dict[str, int]]] = {}
    for item_id, item in domain_items.items():
        for field_name, tokens in _item_field_tokens(item).items():
            for term, tf in sorted(Counter(tokens).items()):
                postings.setdefault(term, {}).setdefault(item_id, {})[field_name] = tf
    return Viewpoint(spec=spec, items=domain_items, postings=postings)


def evaluate(vp: Viewpoint, q: Query) -> ResultSet:
    """Rank domain items against the query. Unknown terms contribute nothing;
    items failing the query's kind/attribute constraints are dropped."""
    scores: dict[str, float] = {}
    for term in q.terms:
        by_item = vp.postings.get(term)
        if not by_item:
            continue
        idf = vp.idf(term)
        for item_id, fields in by_item.items():
            item = vp.items[item_id]
            if q.kind is not None and item.kind is not q.kind:
                continue
            if any(item.attributes.get(k) != v for k, v in sorted(q.attrs.items())):
                continue
            gain = sum(
                vp.spec.field_weights[f] * tf * idf for f, tf in sorted(fields.items())
            )
            scores[item_id] = scores.get(item_id, 0.0) + gain
    hits = tuple(
        (item_id, score)
        for item_id, score in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        if score > 0.0
    )
    return ResultSet(viewpoint_id=vp.spec.id, query=q, hits=hits)


def vocabulary(vp: Viewpoint) -> frozenset[str]:
    return vp.vocabulary

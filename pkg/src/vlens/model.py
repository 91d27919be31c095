"""Typed multigraph of product, process, and organization data.

Items are nodes (components, tasks, org units, actors, documents); edges
carry one of five relationship kinds. Composition edges must stay acyclic
across the whole graph. Interaction and CollaborationLink edges are stored
once and treated as undirected; the other kinds are directed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    CompositionCycleError,
    DanglingEndpointError,
    DuplicateIdError,
    DuplicateRelationshipError,
    NoItemsOfKindError,
    UnknownItemError,
)


class ItemKind(str, enum.Enum):
    PRODUCT_COMPONENT = "ProductComponent"
    PROCESS_TASK = "ProcessTask"
    ORG_UNIT = "OrgUnit"
    ACTOR = "Actor"
    DOCUMENT = "Document"


class RelKind(str, enum.Enum):
    COMPOSITION = "Composition"
    INTERACTION = "Interaction"
    INFORMATION_FLOW = "InformationFlow"
    COLLABORATION_LINK = "CollaborationLink"
    RESPONSIBLE_FOR = "ResponsibleFor"


# Kinds whose edges are stored once and read in both directions.
UNDIRECTED_KINDS = frozenset({RelKind.INTERACTION, RelKind.COLLABORATION_LINK})


@dataclass(frozen=True)
class InformationItem:
    """One node of the universe: a component, task, unit, actor, or document."""

    id: str
    kind: ItemKind
    name: str
    attributes: Mapping[str, str] = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("item id must be non-empty")
        if not isinstance(self.kind, ItemKind):
            raise ValueError(f"bad item kind: {self.kind!r}")
        if not self.name:
            raise ValueError(f"item {self.id!r}: name must be non-empty")


@dataclass(frozen=True)
class Relationship:
    """A typed edge between two items. weight is an interaction frequency;
    0 means unspecified."""

    source: str
    target: str
    kind: RelKind
    weight: float = 0.0

    def __post_init__(self):
        if not isinstance(self.kind, RelKind):
            raise ValueError(f"bad relationship kind: {self.kind!r}")
        w = float(self.weight)
        if not math.isfinite(w) or w < 0.0:
            raise ValueError(f"weight must be a finite non-negative real, got {self.weight!r}")
        object.__setattr__(self, "weight", w)

    def key(self) -> tuple[str, str, str]:
        """Identity triple; undirected kinds are canonicalized so that the
        reversed edge collides with this one."""
        if self.kind in UNDIRECTED_KINDS and self.target < self.source:
            return (self.target, self.source, self.kind.value)
        return (self.source, self.target, self.kind.value)


@dataclass(frozen=True)
class PPCOGraph:
    """Validated, immutable universe of items and relationships."""

    items: tuple[InformationItem, ...]
    relationships: tuple[Relationship, ...]

    @cached_property
    def by_id(self) -> dict[str, InformationItem]:
        return {item.id: item for item in self.items}

    @cached_property
    def _adjacency(self) -> dict[tuple[str, str], list[Relationship]]:
        adj: dict[tuple[str, str], list[Relationship]] = {}
        for rel in self.relationships:
            adj.setdefault((rel.source, rel.kind.value), []).append(rel)
            adj.setdefault((rel.target, rel.kind.value), []).append(rel)
        return adj

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.by_id

    def item(self, item_id: str) -> InformationItem:
        try:
            return self.by_id[item_id]
        except KeyError:
            raise UnknownItemError(f"unknown item: {item_id!r}") from None

    def items_of_kind(self, kind: ItemKind) -> list[InformationItem]:
        """Items of the given kind, sorted by id."""
        return sorted((i for i in self.items if i.kind is kind), key=lambda i: i.id)

    def edges_at(self, item_id: str, kind: RelKind) -> list[Relationship]:
        """Edges of the given kind incident on item_id, either direction."""
        return self._adjacency.get((item_id, kind.value), [])

    def attribute_names(self) -> set[str]:
        names: set[str] = set()
        for item in self.items:
            names.update(item.attributes)
        return names


def build_graph(
    items: Iterable[InformationItem],
    relationships: Iterable[Relationship],
) -> PPCOGraph:
    """Validate and assemble a graph.

    Raises DuplicateIdError, DuplicateRelationshipError, DanglingEndpointError,
    or CompositionCycleError, each naming the offending id(s).
    """
    items = tuple(items)
    relationships = tuple(relationships)

    seen: set[str] = set()
    dupes: set[str] = set()
    for item in items:
        (dupes if item.id in seen else seen).add(item.id)
    if dupes:
        raise DuplicateIdError(f"duplicate item id(s): {', '.join(sorted(dupes))}")

    ids = {i.id for i in items}
    dangling = sorted(
        {e for r in relationships for e in (r.source, r.target) if e not in ids}
    )
    if dangling:
        raise DanglingEndpointError(
            f"relationship endpoint(s) not in graph: {', '.join(dangling)}"
        )

    keys: set[tuple[str, str, str]] = set()
    for rel in relationships:
        k = rel.key()
        if k in keys:
            raise DuplicateRelationshipError(
                f"duplicate relationship {k[0]} -> {k[1]} ({k[2]})"
            )
        keys.add(k)

    cycle = _find_composition_cycle(ids, relationships)
    if cycle:
        raise CompositionCycleError(
            f"composition cycle through: {' -> '.join(cycle)}"
        )

    return PPCOGraph(items=items, relationships=relationships)


def _find_composition_cycle(
    ids: set[str], relationships: tuple[Relationship, ...]
) -> list[str] | None:
    children: dict[str, list[str]] = {}
    for rel in relationships:
        if rel.kind is RelKind.COMPOSITION:
            children.setdefault(rel.source, []).append(rel.target)
    for kids in children.values():
        kids.sort()

    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(ids, WHITE)
    for start in sorted(children):
        if color[start] != WHITE:
            continue
        # iterative DFS keeping the grey path for cycle reporting
        path: list[str] = []
        stack: list[tuple[str, int]] = [(start, 0)]
        color[start] = GREY
        path.append(start)
        while stack:
            node, idx = stack[-1]
            kids = children.get(node, [])
            if idx < len(kids):
                stack[-1] = (node, idx + 1)
                child = kids[idx]
                if color[child] == GREY:
                    return path[path.index(child):] + [child]
                if color[child] == WHITE:
                    color[child] = GREY
                    path.append(child)
                    stack.append((child, 0))
            else:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return None


def neighbors(graph: PPCOGraph, item_id: str, kind: RelKind) -> list[str]:
    """Ids of items connected to item_id by an edge of the given kind,
    in either direction, sorted ascending."""
    if item_id not in graph:
        raise UnknownItemError(f"unknown item: {item_id!r}")
    out: set[str] = set()
    for rel in graph.edges_at(item_id, kind):
        out.add(rel.target if rel.source == item_id else rel.source)
    out.discard(item_id)
    return sorted(out)


def interaction_matrix(graph: PPCOGraph, unit_kind: ItemKind) -> np.ndarray:
    """Symmetric collaboration-frequency matrix over items of unit_kind.

    Row/column order is the sorted ids of that kind (see items_of_kind);
    entry (i, j) is the CollaborationLink weight between them, 0 if absent,
    and the diagonal is always 0.
    """
    units = graph.items_of_kind(unit_kind)
    if not units:
        raise NoItemsOfKindError(f"no items of kind {unit_kind.value}")
    index = {item.id: pos for pos, item in enumerate(units)}
    matrix = np.zeros((len(units), len(units)))
    for rel in graph.relationships:
        if rel.kind is not RelKind.COLLABORATION_LINK:
            continue
        i = index.get(rel.source)
        j = index.get(rel.target)
        if i is None or j is None or i == j:
            continue
        matrix[i, j] = rel.weight
        matrix[j, i] = rel.weight
    return matrix

"""Merging per-viewpoint result sets into a single ranked list.

CombSUM-style weighted fusion: each result set's scores are max-normalized,
weighted by the viewpoint's reliability and the drift of its query from the
session's original query, and summed per item. An item found by several
viewpoints keeps one row whose provenance lists every contributor.

Determinism contract: contributions are accumulated in ascending
viewpoint-id order and the fused value is rounded to 12 decimal places, so
the merged output is bit-identical regardless of input entry order, and
rescaling any one result set by a positive constant cannot perturb fused
values through float noise.
"""

from __future__ import annotations

from dataclasses import dataclass

from .viewpoint import Query, ResultSet

FUSED_DECIMALS = 12


@dataclass(frozen=True)
class FusionEntry:
    """One viewpoint's contribution: its results, its reliability, and the
    drift of the query that produced them."""

    results: ResultSet
    reliability: float
    drift: float

    def __post_init__(self):
        for label, value in (("reliability", self.reliability), ("drift", self.drift)):
            if not 0.0 <= float(value) <= 1.0:
                raise ValueError(f"{label} must lie in [0,1], got {value!r}")
        object.__setattr__(self, "reliability", float(self.reliability))
        object.__setattr__(self, "drift", float(self.drift))


@dataclass(frozen=True)
class FusionInput:
    entries: tuple[FusionEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ValueError("fusion needs at least one entry")
        ids = [e.results.viewpoint_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate viewpoint ids in fusion input: {sorted(ids)}")


@dataclass(frozen=True)
class Provenance:
    viewpoint_id: str
    raw_score: float
    drift: float


@dataclass(frozen=True)
class RankedItem:
    item_id: str
    fused_score: float
    provenance: tuple[Provenance, ...]


@dataclass(frozen=True)
class MergedResult:
    """Single ranked list over all contributing viewpoints. Every item
    appears once, fused score descending, ties by ascending item id.
    Zero-fused items are kept: a viewpoint did return them."""

    ranked: tuple[RankedItem, ...]

    def item_ids(self) -> list[str]:
        return [r.item_id for r in self.ranked]

    def __contains__(self, item_id: str) -> bool:
        return any(r.item_id == item_id for r in self.ranked)


def merge(fusion_input: FusionInput) -> MergedResult:
    """Fuse the entries: fused(i) = sum of reliability * drift * (raw / max)
    over every entry whose results contain i. Empty result sets contribute
    nothing; normalization is per result set."""
    entries = sorted(fusion_input.entries, key=lambda e: e.results.viewpoint_id)
    contributions: dict[str, float] = {}
    provenance: dict[str, list[Provenance]] = {}
    for entry in entries:
        hits = entry.results.hits
        if not hits:
            continue
        top = max(score for _, score in hits)
        for item_id, raw in hits:
            gain = entry.reliability * entry.drift * (raw / top)
            contributions[item_id] = contributions.get(item_id, 0.0) + gain
            provenance.setdefault(item_id, []).append(
                Provenance(entry.results.viewpoint_id, raw, entry.drift)
            )
    ranked = [
        RankedItem(
            item_id=item_id,
            fused_score=round(contributions[item_id], FUSED_DECIMALS),
            provenance=tuple(provenance[item_id]),
        )
        for item_id in contributions
    ]
    ranked.sort(key=lambda r: (-r.fused_score, r.item_id))
    return MergedResult(ranked=tuple(ranked))


def drift_similarity(original: Query, derived: Query) -> float:
    """Jaccard similarity of the two queries' term sets, in [0,1]."""
    a, b = set(original.terms), set(derived.terms)
    return len(a & b) / len(a | b)

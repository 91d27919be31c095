"""Query movement between viewpoints.

Three ways to keep a seek's context when the viewpoint changes: rewrite the
query through term-level mapping rules (RuleRewrite), reuse it untouched when
no rule applies (IdentityFallback), or anchor on an item both viewpoints hold
and enter the target through that item's most discriminative terms
(IntersectionEntry). Mappings are authored by hand or mined from item-level
co-occurrence over the domain intersection.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import NotInIntersectionError
from .viewpoint import Query, Viewpoint, tokenize

ENTRY_TERM_COUNT = 3


class MappingOrigin(str, enum.Enum):
    MANUAL = "Manual"
    MINED = "Mined"


class Strategy(str, enum.Enum):
    RULE_REWRITE = "RuleRewrite"
    IDENTITY_FALLBACK = "IdentityFallback"
    INTERSECTION_ENTRY = "IntersectionEntry"


@dataclass(frozen=True)
class Rule:
    """One term-level substitution: source term to one or more target terms."""

    source: str
    targets: tuple[str, ...]
    confidence: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if tokenize(self.source) != [self.source]:
            raise ValueError(f"rule source {self.source!r} is not a normalized token")
        if not self.targets:
            raise ValueError(f"rule for {self.source!r} needs at least one target term")
        for t in self.targets:
            if tokenize(t) != [t]:
                raise ValueError(f"rule target {t!r} is not a normalized token")
        if not 0.0 < float(self.confidence) <= 1.0:
            raise ValueError(f"confidence must lie in (0,1], got {self.confidence!r}")
        object.__setattr__(self, "confidence", float(self.confidence))


@dataclass(frozen=True)
class TransitionMapping:
    """Directed rule set from one viewpoint's vocabulary to another's."""

    source_vp: str
    target_vp: str
    rules: tuple[Rule, ...] = ()
    origin: MappingOrigin = MappingOrigin.MANUAL

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        seen = set()
        for rule in self.rules:
            if rule.source in seen:
                raise ValueError(f"duplicate rule for source term {rule.source!r}")
            seen.add(rule.source)

    @cached_property
    def _by_source(self) -> dict[str, Rule]:
        return {rule.source: rule for rule in self.rules}

    def rule_for(self, term: str) -> Rule | None:
        return self._by_source.get(term)


@dataclass(frozen=True)
class TranslatedQuery:
    """A query carried into another viewpoint, with how it got there."""

    query: Query
    original: Query
    applied_rules: tuple[Rule, ...]
    strategy: Strategy

    def __post_init__(self):
        if self.strategy is Strategy.IDENTITY_FALLBACK:
            assert self.query == self.original and not self.applied_rules


def translate(mapping: TransitionMapping, q: Query) -> TranslatedQuery:
    """Substitute each term that has a rule, pass the rest through unchanged.

    Never fails: with no applicable rule the result is the identity carry-over.
    """
    out_terms: list[str] = []
    applied: list[Rule] = []
    for term in q.terms:
        rule = mapping.rule_for(term)
        if rule is None:
            out_terms.append(term)
        else:
            out_terms.extend(rule.targets)
            if rule not in applied:
                applied.append(rule)
    if not applied:
        return TranslatedQuery(
            query=q, original=q, applied_rules=(), strategy=Strategy.IDENTITY_FALLBACK
        )
    rewritten = Query(terms=tuple(out_terms), kind=q.kind, attrs=q.attrs)
    return TranslatedQuery(
        query=rewritten, original=q, applied_rules=tuple(applied),
        strategy=Strategy.RULE_REWRITE,
    )


def entry_points(source: Viewpoint, target: Viewpoint, item_id: str) -> TranslatedQuery:
    """Entrance query for an item both viewpoints hold: the item's top
    discriminative terms in the *target* index, so evaluating it in the
    target surfaces the item directly.

    Raises NotInIntersectionError when the item is outside either domain or
    carries no indexed terms in the target; callers fall back to translate().
    """
    if item_id not in source.domain or item_id not in target.domain:
        raise NotInIntersectionError(
            f"item {item_id!r} is not in both viewpoint domains"
        )
    scores = target.term_scores_for(item_id)
    if not scores:
        raise NotInIntersectionError(
            f"item {item_id!r} has no indexed terms in viewpoint {target.spec.id!r}"
        )
    top = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:ENTRY_TERM_COUNT]
    q = Query(terms=tuple(term for term, _ in top))
    return TranslatedQuery(
        query=q, original=q, applied_rules=(), strategy=Strategy.INTERSECTION_ENTRY
    )


def mine_mappings(
    a: Viewpoint, b: Viewpoint, min_confidence: float
) -> TransitionMapping:
    """Derive rewrite rules from item-level co-occurrence over the domain
    intersection: conf(t_a -> t_b) = |items indexed under both| / |items
    indexed under t_a|, counted inside the intersection only. The best
    target per source term is kept when it clears min_confidence; identity
    candidates win ties and are then dropped, so identical vocabularies
    mine to nothing.
    """
    if not 0.0 < min_confidence <= 1.0:
        raise ValueError(f"min_confidence must lie in (0,1], got {min_confidence!r}")
    shared = a.domain & b.domain
    rules: list[Rule] = []
    if shared:
        b_terms_of: dict[str, set[str]] = {i: set() for i in shared}
        for term, by_item in b.postings.items():
            for item_id in by_item:
                if item_id in shared:
                    b_terms_of[item_id].add(term)
        for t_a in sorted(a.vocabulary):
            base = [i for i in a.postings[t_a] if i in shared]
            if not base:
                continue
            counts: dict[str, int] = {}
            for item_id in base:
                for t_b in b_terms_of[item_id]:
                    counts[t_b] = counts.get(t_b, 0) + 1
            if not counts:
                continue
            # ties prefer the identity candidate, then the smaller term
            best = min(counts, key=lambda t: (-counts[t], t != t_a, t))
            if best == t_a:
                continue
            confidence = counts[best] / len(base)
            if confidence >= min_confidence:
                rules.append(Rule(source=t_a, targets=(best,), confidence=confidence))
    return TransitionMapping(
        source_vp=a.spec.id, target_vp=b.spec.id,
        rules=tuple(rules), origin=MappingOrigin.MINED,
    )


def effective_mapping(
    mappings: Iterable[TransitionMapping], source_vp: str, target_vp: str
) -> TransitionMapping | None:
    """Combine every stored mapping for one viewpoint pair into the rule set
    a transition actually uses; manual rules shadow mined ones per source
    term. None when the pair has no mapping at all."""
    relevant = [
        m for m in mappings
        if m.source_vp == source_vp and m.target_vp == target_vp
    ]
    if not relevant:
        return None
    chosen: dict[str, tuple[Rule, MappingOrigin]] = {}
    for mapping in relevant:
        for rule in mapping.rules:
            held = chosen.get(rule.source)
            if held is None or (
                held[1] is MappingOrigin.MINED and mapping.origin is MappingOrigin.MANUAL
            ):
                chosen[rule.source] = (rule, mapping.origin)
    origin = (
        MappingOrigin.MANUAL
        if any(m.origin is MappingOrigin.MANUAL for m in relevant)
        else MappingOrigin.MINED
    )
    rules = tuple(chosen[s][0] for s in sorted(chosen))
    return TransitionMapping(
        source_vp=source_vp, target_vp=target_vp, rules=rules, origin=origin
    )

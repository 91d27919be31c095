"""Viewpoint materialization and query evaluation against a scoring oracle."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlens.errors import (
    EmptyDomainWarning,
    InvalidQueryError,
    UnknownAttributeInFilterError,
)
from vlens.model import (
    InformationItem,
    ItemKind,
    RelKind,
    Relationship,
    build_graph,
)
from vlens.viewpoint import (
    FIELDS,
    AttrEquals,
    KindIs,
    Query,
    ReachableFrom,
    Viewpoint,
    ViewpointSpec,
    evaluate,
    materialize_viewpoint,
    tokenize,
    vocabulary,
)

LN2 = 0.6931471805599453  # ln(2), the idf of a term present in a 1-item domain


def spec(id_="vp", **kw) -> ViewpointSpec:
    kw.setdefault("actor", "someone")
    kw.setdefault("context", "testing")
    kw.setdefault("importance", 1.0)
    return ViewpointSpec(id=id_, **kw)


def pc(id_: str, name: str, desc: str = "", **attrs) -> InformationItem:
    return InformationItem(
        id=id_, kind=ItemKind.PRODUCT_COMPONENT, name=name,
        attributes=attrs, description=desc,
    )


# ------------------------------------------------------------------- tokenizer

def test_tokenizer_lowercases_and_splits():
    assert tokenize("Vortex Finder") == ["vortex", "finder"]
    assert tokenize("anchor-ring  (M24)") == ["anchor", "ring", "m24"]
    assert tokenize("a_b c--d") == ["a", "b", "c", "d"]
    assert tokenize("") == []
    assert tokenize("...!!") == []


# ------------------------------------------------------------ spec validation

def test_spec_normalizes_field_weights():
    s = spec(field_weights={"name": 2.0})
    assert s.field_weights == {"name": 2.0, "description": 1.0, "attributes": 1.0}


def test_spec_rejects_bad_inputs():
    with pytest.raises(ValueError):
        spec(importance=1.5)
    with pytest.raises(ValueError):
        spec(field_weights={"name": 0.0})
    with pytest.raises(ValueError):
        spec(field_weights={"title": 1.0})
    with pytest.raises(ValueError):
        spec(id_="")


def test_query_validation():
    with pytest.raises(InvalidQueryError):
        Query(terms=())
    with pytest.raises(InvalidQueryError):
        Query(terms=("Shape",))
    with pytest.raises(InvalidQueryError):
        Query(terms=("two words",))
    q = Query.from_text("Shape, global DESIGN")
    assert q.terms == ("shape", "global", "design")


# --------------------------------------------------------------- materialize

def test_product_viewpoint_domain_is_nineteen(shape_vp):
    assert len(shape_vp.domain) == 19
    assert all(i.kind is ItemKind.PRODUCT_COMPONENT for i in shape_vp.items.values())


def test_org_viewpoint_domain_is_three(cyclone_graph):
    vp = materialize_viewpoint(
        spec(domain_filter=(KindIs(ItemKind.ORG_UNIT),)), cyclone_graph
    )
    assert sorted(vp.domain) == ["team-1", "team-2", "team-3"]


def test_material_filter_selects_carbon_subset(materials_vp, shape_vp):
    assert len(materials_vp.domain) == 8
    assert materials_vp.domain < shape_vp.domain


def test_empty_filter_warns_and_yields_empty_viewpoint(cyclone_graph):
    with pytest.warns(EmptyDomainWarning):
        vp = materialize_viewpoint(
            spec(domain_filter=(AttrEquals("material", "unobtainium"),)),
            cyclone_graph,
        )
    assert vp.domain == frozenset()
    assert vocabulary(vp) == frozenset()


def test_unknown_attribute_in_filter(cyclone_graph):
    with pytest.raises(UnknownAttributeInFilterError):
        materialize_viewpoint(
            spec(domain_filter=(AttrEquals("colour", "red"),)), cyclone_graph
        )


def test_reachability_is_directional(cyclone_graph):
    # walking Composition downward from a mid-tree node stays below it
    vp = materialize_viewpoint(
        spec(domain_filter=(ReachableFrom("dust-hopper", RelKind.COMPOSITION),)),
        cyclone_graph,
    )
    assert sorted(vp.domain) == ["drain-nozzle", "dust-hopper", "dust-valve"]


def test_postings_stay_inside_domain(shape_vp, materials_vp):
    for vp in (shape_vp, materials_vp):
        for term, by_item in vp.postings.items():
            assert by_item, term
            assert set(by_item) <= vp.domain


def test_vocabulary_matches_token_scan(materials_vp):
    expected = set()
    for item in materials_vp.items.values():
        expected.update(tokenize(item.name))
        expected.update(tokenize(item.description))
        for value in item.attributes.values():
            expected.update(tokenize(value))
    assert vocabulary(materials_vp) == expected


# ------------------------------------------------------------------ evaluate

def brute_force(vp: Viewpoint, q: Query) -> list[tuple[str, float]]:
    """Score every domain item by scanning raw text; no index involved."""
    def field_tokens(item):
        toks = {"name": tokenize(item.name), "description": tokenize(item.description)}
        toks["attributes"] = [
            t for k in sorted(item.attributes) for t in tokenize(item.attributes[k])
        ]
        return toks

    df = {}
    for t in set(q.terms):
        df[t] = sum(
            1 for i in vp.items.values()
            if any(t in toks for toks in field_tokens(i).values())
        )
    scores = {}
    for item in vp.items.values():
        if q.kind is not None and item.kind is not q.kind:
            continue
        if any(item.attributes.get(k) != v for k, v in q.attrs.items()):
            continue
        toks = field_tokens(item)
        total = 0.0
        for t in q.terms:
            if df[t] == 0:
                continue
            idf = math.log(1.0 + len(vp.items) / df[t])
            total += sum(
                vp.spec.field_weights[f] * toks[f].count(t) * idf
                for f in sorted(FIELDS)
                if toks[f].count(t)
            )
        if total > 0.0:
            scores[item.id] = total
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def test_single_item_domain_hand_computed_score():
    g = build_graph([pc("vf", "Vortex Finder")], [])
    vp = materialize_viewpoint(spec(), g)
    rs = evaluate(vp, Query(terms=("vortex",)))
    assert rs.hits == (("vf", LN2),)


def test_vocabulary_of_single_name():
    g = build_graph([pc("vf", "Vortex Finder")], [])
    assert vocabulary(materialize_viewpoint(spec(), g)) == {"vortex", "finder"}


def test_unknown_term_yields_empty_hits(shape_vp):
    assert evaluate(shape_vp, Query(terms=("zeppelin",))).hits == ()


def test_shape_design_ranking_matches_oracle(shape_vp):
    q = Query.from_text("shape design")
    rs = evaluate(shape_vp, q)
    assert list(rs.hits) == brute_force(shape_vp, q)
    assert rs.item_ids()[0] == "cyclone-vessel"  # carries both terms


def test_rewritten_terms_match_oracle_in_materials(materials_vp):
    q = Query.from_text("geometry fabrication")
    rs = evaluate(materials_vp, q)
    assert list(rs.hits) == brute_force(materials_vp, q)
    assert set(rs.item_ids()) == {"cone-section", "inlet-duct", "dust-hopper", "anchor-ring"}


def test_repeated_query_term_scores_twice():
    g = build_graph([pc("a", "gasket seal"), pc("b", "gasket gasket")], [])
    vp = materialize_viewpoint(spec(), g)
    once = evaluate(vp, Query(terms=("gasket",))).hits
    twice = evaluate(vp, Query(terms=("gasket", "gasket"))).hits
    assert [(i, 2 * s) for i, s in once] == list(twice)


def test_tie_breaks_ascending_id():
    g = build_graph([pc("zz", "flange gasket"), pc("aa", "flange gasket")], [])
    vp = materialize_viewpoint(spec(), g)
    assert evaluate(vp, Query(terms=("flange",))).item_ids() == ["aa", "zz"]


def test_query_kind_and_attr_filters(cyclone_graph):
    vp = materialize_viewpoint(
        spec(domain_filter=(KindIs(ItemKind.PRODUCT_COMPONENT),)), cyclone_graph
    )
    steel = Query(terms=("steel",))
    narrowed = Query(terms=("steel",), attrs={"material": "carbon steel"})
    assert set(evaluate(vp, narrowed).item_ids()) < set(evaluate(vp, steel).item_ids())
    wrong_kind = Query(terms=("steel",), kind=ItemKind.DOCUMENT)
    assert evaluate(vp, wrong_kind).hits == ()


def test_field_weight_changes_scores_not_membership(cyclone_graph):
    plain = materialize_viewpoint(
        spec(domain_filter=(KindIs(ItemKind.PRODUCT_COMPONENT),)), cyclone_graph
    )
    boosted = materialize_viewpoint(
        spec(
            domain_filter=(KindIs(ItemKind.PRODUCT_COMPONENT),),
            field_weights={"name": 5.0},
        ),
        cyclone_graph,
    )
    q = Query.from_text("vortex")
    a, b = evaluate(plain, q), evaluate(boosted, q)
    assert set(a.item_ids()) == set(b.item_ids())
    assert dict(a.hits) != dict(b.hits)


def test_evaluate_is_deterministic_across_materializations(cyclone_graph):
    q = Query.from_text("steel welding dust")
    runs = [
        evaluate(
            materialize_viewpoint(
                spec(domain_filter=(KindIs(ItemKind.PRODUCT_COMPONENT),)), cyclone_graph
            ),
            q,
        ).hits
        for _ in range(3)
    ]
    assert runs[0] == runs[1] == runs[2]  # bit-identical scores included


# ------------------------------------------------------------ property checks

WORDS = st.sampled_from(
    "rotor stator shaft seal flange duct liner cover ring plate tube valve".split()
)
NAMES = st.lists(WORDS, min_size=1, max_size=4).map(" ".join)


@st.composite
def indexed_viewpoints(draw) -> Viewpoint:
    n = draw(st.integers(min_value=1, max_value=10))
    items = [
        pc(
            f"i{k:02d}",
            draw(NAMES),
            desc=draw(NAMES) if draw(st.booleans()) else "",
            material=draw(st.sampled_from(["steel", "alloy", "wool"])),
        )
        for k in range(n)
    ]
    weights = {
        "name": draw(st.floats(min_value=0.5, max_value=4.0)),
        "attributes": draw(st.floats(min_value=0.5, max_value=4.0)),
    }
    s = spec(domain_filter=(KindIs(ItemKind.PRODUCT_COMPONENT),), field_weights=weights)
    return materialize_viewpoint(s, build_graph(items, []))


@given(indexed_viewpoints(), st.lists(WORDS, min_size=1, max_size=4))
@settings(max_examples=80)
def test_hits_stay_in_domain_and_match_oracle(vp: Viewpoint, words: list[str]):
    q = Query(terms=tuple(words))
    rs = evaluate(vp, q)
    assert set(rs.item_ids()) <= vp.domain
    assert all(score > 0.0 for _, score in rs.hits)
    assert list(rs.hits) == brute_force(vp, q)


@given(indexed_viewpoints(), st.lists(WORDS, min_size=1, max_size=3))
@settings(max_examples=60)
def test_ordering_is_total(vp: Viewpoint, words: list[str]):
    hits = evaluate(vp, Query(terms=tuple(words))).hits
    keys = [(-s, i) for i, s in hits]
    assert keys == sorted(keys)
    assert len({i for i, _ in hits}) == len(hits)


@given(indexed_viewpoints(), st.lists(WORDS, min_size=1, max_size=3))
@settings(max_examples=60)
def test_shrinking_domain_never_adds_hits(vp: Viewpoint, words: list[str]):
    narrowed_spec = ViewpointSpec(
        id=vp.spec.id,
        actor=vp.spec.actor,
        context=vp.spec.context,
        importance=vp.spec.importance,
        domain_filter=vp.spec.domain_filter + (AttrEquals("material", "steel"),),
        field_weights=vp.spec.field_weights,
    )
    graph = build_graph(vp.items.values(), [])
    if not any(i.attributes.get("material") == "steel" for i in vp.items.values()):
        return
    narrowed = materialize_viewpoint(narrowed_spec, graph)
    q = Query(terms=tuple(words))
    wide_hits = set(evaluate(vp, q).item_ids())
    narrow_hits = set(evaluate(narrowed, q).item_ids())
    assert narrow_hits <= wide_hits

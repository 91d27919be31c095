from __future__ import annotations

import pathlib

import pytest

from vlens.model import ItemKind, RelKind
from vlens.ppco_xml import parse_ppco
from vlens.viewpoint import (
    AttrEquals,
    KindIs,
    ReachableFrom,
    ViewpointSpec,
    materialize_viewpoint,
)

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def cyclone_graph():
    return parse_ppco((FIXTURES / "cyclone.xml").read_bytes())


def make_shape_spec() -> ViewpointSpec:
    """Design-focused viewpoint: every product component under the vessel,
    names weighted up."""
    return ViewpointSpec(
        id="vp-shape",
        actor="actorx",
        context="shape global design",
        importance=0.9,
        domain_filter=(
            KindIs(ItemKind.PRODUCT_COMPONENT),
            ReachableFrom("cyclone-vessel", RelKind.COMPOSITION),
        ),
        field_weights={"name": 2.0},
    )


def make_materials_spec() -> ViewpointSpec:
    """Fabrication-focused viewpoint: the carbon steel parts, attribute
    values weighted up."""
    return ViewpointSpec(
        id="vp-materials",
        actor="actorx",
        context="material and fabrication",
        importance=0.7,
        domain_filter=(
            KindIs(ItemKind.PRODUCT_COMPONENT),
            AttrEquals("material", "carbon steel"),
        ),
        field_weights={"attributes": 2.0},
    )


def make_fixture_mapping():
    """Hand-authored rewrite rules from the design vocabulary into the
    fabrication vocabulary."""
    from vlens.transition import MappingOrigin, Rule, TransitionMapping

    return TransitionMapping(
        source_vp="vp-shape",
        target_vp="vp-materials",
        rules=(
            Rule(source="shape", targets=("geometry",)),
            Rule(source="design", targets=("fabrication",)),
        ),
        origin=MappingOrigin.MANUAL,
    )


@pytest.fixture(scope="session")
def shape_vp(cyclone_graph):
    return materialize_viewpoint(make_shape_spec(), cyclone_graph)


@pytest.fixture(scope="session")
def materials_vp(cyclone_graph):
    return materialize_viewpoint(make_materials_spec(), cyclone_graph)

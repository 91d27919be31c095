"""Catalog persistence: one XML file carrying the graph, the viewpoint
definitions, and the transition mappings, so a deployment can be reopened
exactly as it was saved.

Document shape (UTF-8, strict like the embedded ppco document):

    <catalog version="1">
      <ppco version="1">..</ppco>
      <viewpoints>
        <viewpoint id=".." actor=".." context=".." importance="0.9">
          <filter kind=".."/>
              | <filter attr=".." value=".."/>
              | <filter reachable-from=".." via=".."/>
          <weight field=".." value="1.0"/>
        </viewpoint>*
      </viewpoints>
      <mappings>
        <mapping source_vp=".." target_vp="..">
          <rule from=".." to="t1 t2" confidence="1.0" origin="Manual"/>+
        </mapping>*
      </mappings>
    </catalog>

Rule targets are space-joined; terms are normalized tokens, so the join is
unambiguous. Every rule repeats its mapping's origin, and a mapping element
that mixes origins is rejected. Loading re-materializes each viewpoint
against the embedded graph, so a catalog that loads is one that runs.
"""

from __future__ import annotations

import math
import os
import pathlib
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .errors import CatalogIoError, GraphError, GraphInvalidError, SchemaViolationError
from .model import ItemKind, PPCOGraph, RelKind, build_graph
from .ppco_xml import (
    _enum_attr,
    _no_stray_text,
    _only_attrs,
    build_ppco_element,
    document_root,
    parse_ppco_element,
)
from .transition import MappingOrigin, Rule, TransitionMapping
from .viewpoint import (
    FIELDS,
    AttrEquals,
    KindIs,
    ReachableFrom,
    Viewpoint,
    ViewpointSpec,
    materialize_viewpoint,
)


@dataclass(frozen=True)
class Catalog:
    """Everything a deployment holds. Specs and mappings are kept in
    canonical order so equal catalogs serialize to identical bytes."""

    graph: PPCOGraph
    specs: tuple[ViewpointSpec, ...] = ()
    mappings: tuple[TransitionMapping, ...] = ()

    def __post_init__(self):
        specs = tuple(sorted(self.specs, key=lambda s: s.id))
        mappings = tuple(sorted(self.mappings, key=lambda m: (m.source_vp, m.target_vp)))
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "mappings", mappings)
        known: set[str] = set()
        for spec in specs:
            if spec.id in known:
                raise ValueError(f"duplicate viewpoint id {spec.id!r}")
            known.add(spec.id)
            owner = self.graph.by_id.get(spec.actor)
            if owner is None or owner.kind is not ItemKind.ACTOR:
                raise ValueError(f"viewpoint {spec.id!r} names unknown actor {spec.actor!r}")
        for mapping in mappings:
            for end in (mapping.source_vp, mapping.target_vp):
                if end not in known:
                    raise ValueError(f"mapping references unknown viewpoint {end!r}")
            if not mapping.rules:
                raise ValueError(
                    f"mapping {mapping.source_vp!r} to {mapping.target_vp!r} has no rules"
                )

    def materialize(self) -> dict[str, Viewpoint]:
        return {s.id: materialize_viewpoint(s, self.graph) for s in self.specs}


def parse_catalog(document: bytes | str) -> Catalog:
    root = document_root(document)
    if root.tag != "catalog":
        raise SchemaViolationError("/", f"expected root element 'catalog', got '{root.tag}'")
    path = "/catalog"
    _only_attrs(root, path, required={"version"})
    if root.get("version") != "1":
        raise SchemaViolationError(f"{path}/@version", "unsupported version, expected '1'")
    _no_stray_text(root, path)

    ppco_el = vps_el = maps_el = None
    for child in root:
        if child.tag == "ppco" and ppco_el is None:
            ppco_el = child
        elif child.tag == "viewpoints" and vps_el is None:
            vps_el = child
        elif child.tag == "mappings" and maps_el is None:
            maps_el = child
        else:
            raise SchemaViolationError(f"{path}/{child.tag}", "unexpected or repeated element")
    if ppco_el is None:
        raise SchemaViolationError(path, "missing 'ppco' element")
    if vps_el is None:
        raise SchemaViolationError(path, "missing 'viewpoints' element")
    if maps_el is None:
        raise SchemaViolationError(path, "missing 'mappings' element")

    items, relationships = parse_ppco_element(ppco_el, path)
    try:
        graph = build_graph(items, relationships)
    except GraphError as exc:
        raise GraphInvalidError(exc) from None
    specs = _parse_viewpoints(vps_el, f"{path}/viewpoints")
    mappings = _parse_mappings(maps_el, f"{path}/mappings")
    try:
        return Catalog(graph=graph, specs=specs, mappings=mappings)
    except ValueError as exc:
        raise SchemaViolationError(path, str(exc)) from None


def _parse_viewpoints(vps_el: ET.Element, path: str) -> tuple[ViewpointSpec, ...]:
    _only_attrs(vps_el, path, required=set())
    _no_stray_text(vps_el, path)
    specs = []
    for n, el in enumerate(vps_el, start=1):
        vpath = f"{path}/viewpoint[{n}]"
        if el.tag != "viewpoint":
            raise SchemaViolationError(f"{path}/{el.tag}", "unexpected element, expected 'viewpoint'")
        _only_attrs(el, vpath, required={"id", "actor", "context", "importance"})
        _no_stray_text(el, vpath)
        importance = _float_attr(el, "importance", vpath)

        clauses = []
        weights: dict[str, float] = {}
        for child in el:
            if child.tag == "filter":
                clauses.append(_parse_filter(child, f"{vpath}/filter"))
            elif child.tag == "weight":
                wpath = f"{vpath}/weight"
                _only_attrs(child, wpath, required={"field", "value"})
                field_name = child.get("field", "")
                if field_name not in FIELDS:
                    raise SchemaViolationError(f"{wpath}/@field", f"expected one of {FIELDS}")
                if field_name in weights:
                    raise SchemaViolationError(wpath, f"repeated weight for field {field_name!r}")
                weights[field_name] = _float_attr(child, "value", wpath)
            else:
                raise SchemaViolationError(f"{vpath}/{child.tag}", "unexpected element")
        try:
            specs.append(
                ViewpointSpec(
                    id=el.get("id", ""),
                    actor=el.get("actor", ""),
                    context=el.get("context", ""),
                    importance=importance,
                    domain_filter=tuple(clauses),
                    field_weights=weights,
                )
            )
        except ValueError as exc:
            raise SchemaViolationError(vpath, str(exc)) from None
    return tuple(specs)


def _parse_filter(el: ET.Element, path: str):
    keys = set(el.attrib)
    if len(el) or (el.text and el.text.strip()):
        raise SchemaViolationError(path, "filter must be empty")
    if keys == {"kind"}:
        return KindIs(_enum_attr(el, "kind", ItemKind, path))
    if keys == {"attr", "value"}:
        name = el.get("attr", "")
        if not name:
            raise SchemaViolationError(f"{path}/@attr", "attr must be non-empty")
        return AttrEquals(name, el.get("value", ""))
    if keys == {"reachable-from", "via"}:
        root = el.get("reachable-from", "")
        if not root:
            raise SchemaViolationError(f"{path}/@reachable-from", "root id must be non-empty")
        return ReachableFrom(root, _enum_attr(el, "via", RelKind, path))
    raise SchemaViolationError(
        path,
        "expected attributes (kind) or (attr, value) or (reachable-from, via), "
        f"got ({', '.join(sorted(keys))})",
    )


def _parse_mappings(maps_el: ET.Element, path: str) -> tuple[TransitionMapping, ...]:
    _only_attrs(maps_el, path, required=set())
    _no_stray_text(maps_el, path)
    mappings = []
    for n, el in enumerate(maps_el, start=1):
        mpath = f"{path}/mapping[{n}]"
        if el.tag != "mapping":
            raise SchemaViolationError(f"{path}/{el.tag}", "unexpected element, expected 'mapping'")
        _only_attrs(el, mpath, required={"source_vp", "target_vp"})
        _no_stray_text(el, mpath)
        source_vp = el.get("source_vp", "")
        target_vp = el.get("target_vp", "")
        if not source_vp or not target_vp:
            raise SchemaViolationError(mpath, "source_vp and target_vp must be non-empty")

        rules = []
        origin: MappingOrigin | None = None
        for i, rel in enumerate(el, start=1):
            rpath = f"{mpath}/rule[{i}]"
            if rel.tag != "rule":
                raise SchemaViolationError(f"{mpath}/{rel.tag}", "unexpected element, expected 'rule'")
            _only_attrs(rel, rpath, required={"from", "to", "confidence", "origin"})
            if len(rel) or (rel.text and rel.text.strip()):
                raise SchemaViolationError(rpath, "rule must be empty")
            rule_origin = _enum_attr(rel, "origin", MappingOrigin, rpath)
            if origin is None:
                origin = rule_origin
            elif rule_origin is not origin:
                raise SchemaViolationError(rpath, "rules of one mapping must share an origin")
            try:
                rules.append(
                    Rule(
                        source=rel.get("from", ""),
                        targets=tuple(rel.get("to", "").split()),
                        confidence=_float_attr(rel, "confidence", rpath),
                    )
                )
            except ValueError as exc:
                raise SchemaViolationError(rpath, str(exc)) from None
        if origin is None:
            raise SchemaViolationError(mpath, "mapping needs at least one rule")
        try:
            mappings.append(
                TransitionMapping(
                    source_vp=source_vp, target_vp=target_vp,
                    rules=tuple(rules), origin=origin,
                )
            )
        except ValueError as exc:
            raise SchemaViolationError(mpath, str(exc)) from None
    return tuple(mappings)


def _float_attr(el: ET.Element, attr: str, path: str) -> float:
    raw = el.get(attr, "")
    try:
        value = float(raw)
    except ValueError:
        raise SchemaViolationError(f"{path}/@{attr}", f"not a decimal: {raw!r}") from None
    if not math.isfinite(value):
        raise SchemaViolationError(f"{path}/@{attr}", f"must be finite: {raw!r}")
    return value


def build_catalog_element(catalog: Catalog) -> ET.Element:
    root = ET.Element("catalog", {"version": "1"})
    root.append(build_ppco_element(catalog.graph))

    vps_el = ET.SubElement(root, "viewpoints")
    for spec in catalog.specs:
        vp_el = ET.SubElement(
            vps_el,
            "viewpoint",
            {
                "id": spec.id,
                "actor": spec.actor,
                "context": spec.context,
                "importance": repr(spec.importance),
            },
        )
        for clause in spec.domain_filter:
            if isinstance(clause, KindIs):
                ET.SubElement(vp_el, "filter", {"kind": clause.kind.value})
            elif isinstance(clause, AttrEquals):
                ET.SubElement(vp_el, "filter", {"attr": clause.name, "value": clause.value})
            else:
                ET.SubElement(
                    vp_el, "filter",
                    {"reachable-from": clause.root, "via": clause.via.value},
                )
        for field_name in FIELDS:
            ET.SubElement(
                vp_el, "weight",
                {"field": field_name, "value": repr(spec.field_weights[field_name])},
            )

    maps_el = ET.SubElement(root, "mappings")
    for mapping in catalog.mappings:
        m_el = ET.SubElement(
            maps_el, "mapping",
            {"source_vp": mapping.source_vp, "target_vp": mapping.target_vp},
        )
        for rule in mapping.rules:
            ET.SubElement(
                m_el, "rule",
                {
                    "from": rule.source,
                    "to": " ".join(rule.targets),
                    "confidence": repr(rule.confidence),
                    "origin": mapping.origin.value,
                },
            )
    return root


def serialize_catalog(catalog: Catalog) -> bytes:
    root = build_catalog_element(catalog)
    ET.indent(root)
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True)


def save_catalog(catalog: Catalog, path: str | os.PathLike) -> None:
    try:
        pathlib.Path(path).write_bytes(serialize_catalog(catalog))
    except OSError as exc:
        raise CatalogIoError(f"cannot write catalog {os.fspath(path)!r}: {exc}") from None


def load_catalog(path: str | os.PathLike) -> Catalog:
    """Read, parse, and re-materialize a saved catalog. Materialization makes
    filter problems (an attribute no item carries, say) surface at load time
    instead of at first query."""
    try:
        data = pathlib.Path(path).read_bytes()
    except OSError as exc:
        raise CatalogIoError(f"cannot read catalog {os.fspath(path)!r}: {exc}") from None
    catalog = parse_catalog(data)
    catalog.materialize()
    return catalog

"""XML ingestion and serialization for the item/relationship universe.

Document shape (UTF-8, strict: unknown elements or attributes are rejected):

    <ppco version="1">
      <items>
        <item id=".." kind=".." name="..">
          <attr name="..">value</attr>*
          <description>text</description>?
        </item>*
      </items>
      <relationships>
        <rel source=".." target=".." kind=".." weight="0"/>*
      </relationships>
    </ppco>

serialize_ppco is deterministic: items sorted by id, item attributes sorted
by name, relationships sorted by (source, target, kind), so equal graphs
produce identical bytes and every document re-parses to an isomorphic graph.
"""

from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET

from .errors import (
    GraphError,
    GraphInvalidError,
    MalformedXmlError,
    SchemaViolationError,
)
from .model import (
    InformationItem,
    ItemKind,
    PPCOGraph,
    RelKind,
    Relationship,
    build_graph,
)

_ENCODING_DECL = re.compile(rb'<\?xml[^>]*encoding=["\']([^"\']+)["\']')


def document_root(document: bytes | str) -> ET.Element:
    """Decode and parse raw XML. Strings are taken as already-decoded text;
    byte documents must be UTF-8. Parser failures carry line and column."""
    if isinstance(document, str):
        data = document.encode("utf-8")
    else:
        data = document
        decl = _ENCODING_DECL.match(data.lstrip())
        if decl and decl.group(1).decode("ascii", "replace").lower() not in ("utf-8", "utf8"):
            raise SchemaViolationError("/", "document encoding must be UTF-8")
    try:
        return ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise MalformedXmlError(line, column, exc.msg if hasattr(exc, "msg") else str(exc)) from None


def parse_ppco(document: bytes | str) -> PPCOGraph:
    """Parse a PPCO document into a validated graph.

    Raises MalformedXmlError (with line/column), SchemaViolationError (with
    the offending path), or GraphInvalidError wrapping the graph-level error.
    """
    root = document_root(document)
    items, relationships = parse_ppco_element(root, "/")
    try:
        return build_graph(items, relationships)
    except GraphError as exc:
        raise GraphInvalidError(exc) from None


def parse_ppco_element(
    root: ET.Element, parent_path: str
) -> tuple[list[InformationItem], list[Relationship]]:
    """Strictly walk a `ppco` element (standalone or embedded in a catalog)."""
    path = parent_path.rstrip("/") + "/ppco"
    if root.tag != "ppco":
        raise SchemaViolationError(parent_path, f"expected root element 'ppco', got '{root.tag}'")
    _only_attrs(root, path, required={"version"})
    if root.get("version") != "1":
        raise SchemaViolationError(f"{path}/@version", "unsupported version, expected '1'")
    _no_stray_text(root, path)

    items_el = None
    rels_el = None
    for child in root:
        if child.tag == "items" and items_el is None:
            items_el = child
        elif child.tag == "relationships" and rels_el is None:
            rels_el = child
        else:
            raise SchemaViolationError(f"{path}/{child.tag}", "unexpected or repeated element")
    if items_el is None:
        raise SchemaViolationError(path, "missing 'items' element")
    if rels_el is None:
        raise SchemaViolationError(path, "missing 'relationships' element")

    items = _parse_items(items_el, f"{path}/items")
    relationships = _parse_relationships(rels_el, f"{path}/relationships")
    return items, relationships


def _parse_items(items_el: ET.Element, path: str) -> list[InformationItem]:
    _only_attrs(items_el, path, required=set())
    _no_stray_text(items_el, path)
    items = []
    for n, el in enumerate(items_el, start=1):
        ipath = f"{path}/item[{n}]"
        if el.tag != "item":
            raise SchemaViolationError(f"{path}/{el.tag}", "unexpected element, expected 'item'")
        _only_attrs(el, ipath, required={"id", "kind", "name"})
        _no_stray_text(el, ipath)
        item_id = el.get("id", "")
        if not item_id:
            raise SchemaViolationError(f"{ipath}/@id", "id must be non-empty")
        kind = _enum_attr(el, "kind", ItemKind, ipath)
        name = el.get("name", "")
        if not name:
            raise SchemaViolationError(f"{ipath}/@name", "name must be non-empty")

        attributes: dict[str, str] = {}
        description = ""
        saw_description = False
        for child in el:
            if child.tag == "attr":
                cpath = f"{ipath}/attr[@name={child.get('name', '')!r}]"
                _only_attrs(child, cpath, required={"name"})
                attr_name = child.get("name", "")
                if not attr_name:
                    raise SchemaViolationError(f"{cpath}/@name", "attr name must be non-empty")
                if attr_name in attributes:
                    raise SchemaViolationError(cpath, "duplicate attr name")
                if len(child):
                    raise SchemaViolationError(cpath, "attr must not contain elements")
                attributes[attr_name] = child.text or ""
            elif child.tag == "description":
                cpath = f"{ipath}/description"
                if saw_description:
                    raise SchemaViolationError(cpath, "repeated description")
                _only_attrs(child, cpath, required=set())
                if len(child):
                    raise SchemaViolationError(cpath, "description must not contain elements")
                description = child.text or ""
                saw_description = True
            else:
                raise SchemaViolationError(f"{ipath}/{child.tag}", "unexpected element")
        items.append(
            InformationItem(
                id=item_id, kind=kind, name=name,
                attributes=attributes, description=description,
            )
        )
    return items


def _parse_relationships(rels_el: ET.Element, path: str) -> list[Relationship]:
    _only_attrs(rels_el, path, required=set())
    _no_stray_text(rels_el, path)
    relationships = []
    for n, el in enumerate(rels_el, start=1):
        rpath = f"{path}/rel[{n}]"
        if el.tag != "rel":
            raise SchemaViolationError(f"{path}/{el.tag}", "unexpected element, expected 'rel'")
        _only_attrs(el, rpath, required={"source", "target", "kind"}, optional={"weight"})
        if len(el) or (el.text and el.text.strip()):
            raise SchemaViolationError(rpath, "rel must be empty")
        source = el.get("source", "")
        target = el.get("target", "")
        if not source or not target:
            raise SchemaViolationError(rpath, "source and target must be non-empty")
        kind = _enum_attr(el, "kind", RelKind, rpath)
        weight = _weight_attr(el, rpath)
        relationships.append(Relationship(source=source, target=target, kind=kind, weight=weight))
    return relationships


def _weight_attr(el: ET.Element, path: str) -> float:
    raw = el.get("weight")
    if raw is None:
        return 0.0
    try:
        weight = float(raw)
    except ValueError:
        raise SchemaViolationError(f"{path}/@weight", f"not a decimal: {raw!r}") from None
    if not math.isfinite(weight) or weight < 0:
        raise SchemaViolationError(f"{path}/@weight", f"must be a finite non-negative decimal: {raw!r}")
    return weight


def _enum_attr(el: ET.Element, attr: str, enum_cls, path: str):
    raw = el.get(attr, "")
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = "|".join(k.value for k in enum_cls)
        raise SchemaViolationError(f"{path}/@{attr}", f"expected one of {allowed}, got {raw!r}") from None


def _only_attrs(el: ET.Element, path: str, required: set[str], optional: set[str] = frozenset()):
    for key in el.attrib:
        if key not in required and key not in optional:
            raise SchemaViolationError(f"{path}/@{key}", "unexpected attribute")
    for key in required:
        if key not in el.attrib:
            raise SchemaViolationError(path, f"missing attribute '{key}'")


def _no_stray_text(el: ET.Element, path: str):
    if el.text and el.text.strip():
        raise SchemaViolationError(path, "unexpected text content")
    for child in el:
        if child.tail and child.tail.strip():
            raise SchemaViolationError(path, "unexpected text content")


def build_ppco_element(graph: PPCOGraph) -> ET.Element:
    """Deterministic `ppco` element for a graph (shared with the catalog)."""
    root = ET.Element("ppco", {"version": "1"})
    items_el = ET.SubElement(root, "items")
    for item in sorted(graph.items, key=lambda i: i.id):
        el = ET.SubElement(
            items_el, "item", {"id": item.id, "kind": item.kind.value, "name": item.name}
        )
        for attr_name in sorted(item.attributes):
            attr_el = ET.SubElement(el, "attr", {"name": attr_name})
            attr_el.text = item.attributes[attr_name]
        if item.description:
            desc = ET.SubElement(el, "description")
            desc.text = item.description
    rels_el = ET.SubElement(root, "relationships")
    for rel in sorted(graph.relationships, key=lambda r: (r.source, r.target, r.kind.value)):
        ET.SubElement(
            rels_el,
            "rel",
            {
                "source": rel.source,
                "target": rel.target,
                "kind": rel.kind.value,
                "weight": repr(rel.weight),
            },
        )
    return root


def serialize_ppco(graph: PPCOGraph) -> bytes:
    """Serialize a graph to a UTF-8 document that re-parses isomorphically."""
    root = build_ppco_element(graph)
    ET.indent(root)
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True)

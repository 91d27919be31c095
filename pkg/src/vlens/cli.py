"""Command-line front door.

All commands work against the catalog file named by VLENS_CATALOG (default
"catalog.xml"); `serve --catalog` overrides it. Exit codes: 0 success,
1 usage error, 2 data or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import pathlib
import sys

import pydantic

from .catalog import Catalog, load_catalog, save_catalog
from .errors import (
    CatalogIoError,
    SchemaViolationError,
    UnknownActorError,
    UnknownViewpointError,
    VlensError,
)
from .model import ItemKind
from .orchestrator import Orchestrator
from .ppco_xml import parse_ppco
from .service import ViewpointBody, serve, spec_from_body
from .transition import MappingOrigin, mine_mappings
from .viewpoint import Query, evaluate, tokenize


def _catalog_path() -> str:
    return os.environ.get("VLENS_CATALOG", "catalog.xml")


def _read_bytes(path: str) -> bytes:
    try:
        return pathlib.Path(path).read_bytes()
    except OSError as exc:
        raise CatalogIoError(f"cannot read {path!r}: {exc}") from None


def _terms_query(raw_terms: list[str]) -> Query:
    return Query(terms=tuple(t for raw in raw_terms for t in tokenize(raw)))


# ------------------------------------------------------------------- commands

def _cmd_ingest(args) -> int:
    graph = parse_ppco(_read_bytes(args.file))
    path = _catalog_path()
    if os.path.exists(path):
        catalog = load_catalog(path)
        try:
            catalog = Catalog(graph, catalog.specs, catalog.mappings)
        except ValueError as exc:
            raise SchemaViolationError("/catalog", str(exc)) from None
        catalog.materialize()
    else:
        catalog = Catalog(graph)
    save_catalog(catalog, path)
    print(
        f"ingested {len(graph.items)} items, "
        f"{len(graph.relationships)} relationships -> {path}"
    )
    return 0


def _cmd_viewpoint_add(args) -> int:
    raw = _read_bytes(args.spec_file)
    try:
        body = ViewpointBody.model_validate_json(raw)
    except pydantic.ValidationError as exc:
        raise SchemaViolationError(args.spec_file, str(exc)) from None
    spec = spec_from_body(body)

    path = _catalog_path()
    catalog = load_catalog(path)
    owner = catalog.graph.by_id.get(spec.actor)
    if owner is None or owner.kind is not ItemKind.ACTOR:
        raise UnknownActorError(f"unknown actor: {spec.actor!r}")
    try:
        catalog = Catalog(catalog.graph, catalog.specs + (spec,), catalog.mappings)
    except ValueError as exc:
        raise SchemaViolationError("/catalog", str(exc)) from None
    domain = len(catalog.materialize()[spec.id].items)
    save_catalog(catalog, path)
    print(f"added viewpoint {spec.id} (domain size {domain}) -> {path}")
    return 0


def _cmd_query(args) -> int:
    catalog = load_catalog(_catalog_path())
    viewpoints = catalog.materialize()
    if args.viewpoint not in viewpoints:
        raise UnknownViewpointError(f"unknown viewpoint: {args.viewpoint!r}")
    result = evaluate(viewpoints[args.viewpoint], _terms_query(args.terms))
    if not result.hits:
        print("no results")
        return 0
    for rank, (item_id, score) in enumerate(result.hits, start=1):
        print(f"{rank:3}. {item_id:<24} {score:.6f}")
    return 0


def _cmd_session(args) -> int:
    catalog = load_catalog(_catalog_path())
    orchestrator = Orchestrator(catalog.graph, catalog.materialize(), catalog.mappings)
    session = orchestrator.open_session(args.actor, args.viewpoints)
    print(f"session {session.id} for {session.actor}")
    print("enter query terms; ':switch <viewpoint> [anchor]' changes focus; ':quit' leaves")
    while True:
        try:
            line = input(f"{session.active_viewpoints[0]}> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line in (":quit", ":q"):
            break
        if line.split()[0] == ":switch":
            parts = line.split()
            if len(parts) not in (2, 3):
                print("usage: :switch <viewpoint> [anchor]")
                continue
            anchor = parts[2] if len(parts) == 3 else None
            try:
                proposal = orchestrator.transition(session.id, parts[1], anchor=anchor)
            except VlensError as exc:
                print(f"error: {exc.message}")
                continue
            print(f"[{proposal.strategy.value}] proposed query: {' '.join(proposal.query.terms)}")
            continue
        if line.startswith(":"):
            print(f"unknown command {line.split()[0]!r}")
            continue
        try:
            merged = orchestrator.submit_query(session.id, _terms_query([line]))
        except VlensError as exc:
            print(f"error: {exc.message}")
            continue
        if not merged.ranked:
            print("no results")
        for rank, row in enumerate(merged.ranked, start=1):
            chips = " ".join(
                f"[{p.viewpoint_id} {p.raw_score:.3f}x{p.drift:.2f}]"
                for p in row.provenance
            )
            print(f"{rank:3}. {row.item_id:<24} {row.fused_score:.6f}  {chips}")
    return 0


def _cmd_mine(args) -> int:
    path = _catalog_path()
    catalog = load_catalog(path)
    viewpoints = catalog.materialize()
    for vp_id in (args.from_vp, args.to_vp):
        if vp_id not in viewpoints:
            raise UnknownViewpointError(f"unknown viewpoint: {vp_id!r}")
    mined = mine_mappings(viewpoints[args.from_vp], viewpoints[args.to_vp], args.min_conf)
    kept = tuple(
        m
        for m in catalog.mappings
        if not (
            m.origin is MappingOrigin.MINED
            and m.source_vp == mined.source_vp
            and m.target_vp == mined.target_vp
        )
    )
    if mined.rules:
        kept = kept + (mined,)
    if kept != catalog.mappings:
        save_catalog(Catalog(catalog.graph, catalog.specs, kept), path)
    if not mined.rules:
        print("no rules mined")
        return 0
    for rule in mined.rules:
        print(f"{rule.source} -> {' '.join(rule.targets)} (confidence {rule.confidence:.2f})")
    return 0


def _cmd_serve(args) -> int:
    path = args.catalog if args.catalog is not None else _catalog_path()
    catalog = load_catalog(path)
    serve(catalog, args.port, catalog_path=path)
    return 0


# --------------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here reserves 2 for
    data problems, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _confidence(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal: {raw!r}") from None
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0,1], got {raw}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vlens", description="multi-viewpoint retrieval over product data")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ingest", help="replace the catalog graph from a product document")
    p.add_argument("file", help="PPCO XML document")
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("viewpoint", help="viewpoint administration")
    vp_sub = p.add_subparsers(dest="action", required=True, metavar="action")
    p_add = vp_sub.add_parser("add", help="add a viewpoint from a JSON definition")
    p_add.add_argument("spec_file", help="JSON viewpoint definition")
    p_add.set_defaults(fn=_cmd_viewpoint_add)

    p = sub.add_parser("query", help="run one query against one viewpoint")
    p.add_argument("--viewpoint", required=True, help="viewpoint id")
    p.add_argument("terms", nargs="+", help="query terms")
    p.set_defaults(fn=_cmd_query)

    p = sub.add_parser("session", help="interactive multi-viewpoint seek")
    p.add_argument("--actor", required=True, help="actor item id")
    p.add_argument("--viewpoints", nargs="+", required=True, help="active viewpoint ids")
    p.set_defaults(fn=_cmd_session)

    p = sub.add_parser("mine", help="mine a transition mapping between two viewpoints")
    p.add_argument("--from", dest="from_vp", required=True, help="source viewpoint id")
    p.add_argument("--to", dest="to_vp", required=True, help="target viewpoint id")
    p.add_argument("--min-conf", type=_confidence, required=True, help="confidence floor in (0,1]")
    p.set_defaults(fn=_cmd_mine)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--catalog", default=None, help="catalog path (default: $VLENS_CATALOG)")
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except KeyboardInterrupt:
        return 0
    except CatalogIoError as exc:
        print(f"vlens: {exc.message}", file=sys.stderr)
        return 3
    except VlensError as exc:
        print(f"vlens: {exc.message}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"vlens: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Minimal NASTRAN bulk-data reader/writer (GRID, CTRIA3, CQUAD4).

Small-field cards use fixed 8-character columns with the keyword in columns
1-8; a line containing a comma is read as free-field. Continuations, large
field and include files are not supported. The native JSON mesh format lives
here as well.
"""
from __future__ import annotations

import io
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import BdfParseError, MeshError
from .mesh import Element, ElementKind, Mesh

log = logging.getLogger(__name__)

_INT = re.compile(r"^[+-]?\d+$")
_REAL = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_SHORT_EXP = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)[+-]\d+$")

_ELEMENT_CARDS = {"CTRIA3": ElementKind.TRI, "CQUAD4": ElementKind.QUAD}
_SILENT = {"BEGIN BULK", "BEGIN", "CEND"}


@dataclass
class BulkDeck:
    mesh: Mesh
    property_ids: dict = field(default_factory=dict)
    source_lines: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def _int_field(text, name, lineno, required=True, default=None):
    text = text.strip()
    if not text:
        if required:
            raise BdfParseError(f"missing required field {name}", lineno)
        return default
    if not _INT.match(text):
        raise BdfParseError(f"malformed integer in field {name}: {text!r}", lineno)
    value = int(text)
    if value <= 0:
        raise BdfParseError(f"field {name} must be a positive id, got {value}", lineno)
    return value


def _real_field(text, name, lineno):
    text = text.strip()
    if not text:
        return 0.0
    if _REAL.match(text) or _INT.match(text):
        return float(text)
    if _SHORT_EXP.match(text):
        raise BdfParseError(f"short exponent form {text!r} in field {name} is not supported; "
                            "use an E exponent", lineno)
    if re.match(r"^[+-]?(\d+\.?\d*|\.\d+)[dD][+-]?\d+$", text):
        raise BdfParseError(f"only E exponents are supported in field {name}: {text!r}", lineno)
    raise BdfParseError(f"malformed real in field {name}: {text!r}", lineno)


def _split(line):
    if "," in line:
        parts = line.split(",")
        return parts[0].strip().upper(), [p.strip() for p in parts[1:]]
    keyword = line[:8].strip().upper()
    fields = [line[8 * i:8 * i + 8] for i in range(1, 9)]
    return keyword, fields


def _get(fields, i):
    return fields[i - 1] if i - 1 < len(fields) else ""


def parse_bdf(text) -> BulkDeck:
    """Parse bulk data from a string or text stream."""
    if not isinstance(text, str):
        text = text.read()
    nodes, node_lines = {}, {}
    elements, pids, elem_lines = {}, {}, {}
    warnings = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("$"):
            continue
        keyword, fields = _split(line)
        if keyword == "ENDDATA":
            break
        if keyword in _SILENT or line.strip().upper() in _SILENT:
            continue
        if keyword == "GRID":
            nid = _int_field(_get(fields, 1), "ID", lineno)
            raw_xyz = [_get(fields, i) for i in (3, 4, 5)]
            # a GRID with all three coordinate fields blank has no known position
            xyz = None if not any(f.strip() for f in raw_xyz) else tuple(
                _real_field(f, f"X{k}", lineno) for k, f in enumerate(raw_xyz, start=1))
            if nid in nodes:
                raise BdfParseError(f"duplicate GRID id {nid} (first defined on line {node_lines[nid]})",
                                    lineno)
            nodes[nid] = xyz
            node_lines[nid] = lineno
        elif keyword in _ELEMENT_CARDS:
            kind = _ELEMENT_CARDS[keyword]
            eid = _int_field(_get(fields, 1), "EID", lineno)
            pid = _int_field(_get(fields, 2), "PID", lineno, required=False, default=eid)
            conn = tuple(_int_field(_get(fields, 2 + k), f"G{k}", lineno)
                         for k in range(1, kind.n_nodes + 1))
            if eid in elements:
                raise BdfParseError(f"duplicate element id {eid} (first defined on line "
                                    f"{elem_lines[eid]})", lineno)
            try:
                elements[eid] = Element(eid, kind, conn)
            except MeshError as exc:
                raise BdfParseError(str(exc), lineno) from None
            pids[eid] = pid
            elem_lines[eid] = lineno
        else:
            what = keyword or line.strip()[:8]
            if not keyword or keyword.startswith(("+", "*")):
                msg = f"line {lineno}: continuation cards are not supported; skipped {what!r}"
            else:
                msg = f"line {lineno}: unsupported card {what!r} skipped"
            warnings.append(msg)
            log.warning(msg)
    for eid in sorted(elements, key=lambda e: elem_lines[e]):
        missing = [n for n in elements[eid].nodes if n not in nodes]
        if missing:
            raise BdfParseError(f"element {eid} references undefined GRID {missing[0]}",
                                elem_lines[eid])
    mesh = Mesh(nodes, elements, {})
    return BulkDeck(mesh, pids, elem_lines, warnings)


def format_real(x: float) -> str:
    """Shortest-error text for ``x`` that fits in an 8-character field."""
    x = float(x)
    if x == 0.0:
        return "0."
    best = None
    for digits in range(7, -1, -1):
        s = f"{x:.{digits}f}"
        s = s.rstrip("0") if digits else s + "."
        if len(s) <= 8 and float(s) != 0.0:
            best = _pick(best, s, x)
        mant, exp = f"{x:.{digits}E}".split("E")
        mant = mant.rstrip("0") if "." in mant else mant + "."
        s = f"{mant}E{int(exp)}"
        if len(s) <= 8:
            best = _pick(best, s, x)
    if best is None:
        raise ValueError(f"cannot fit {x!r} into an 8-character field")
    return best


def _pick(best, s, x):
    # least error, then shortest, then plain decimal over exponent form
    key = lambda t: (abs(float(t) - x), len(t), "E" in t, t)
    return s if best is None or key(s) < key(best) else best


def _card(keyword, values) -> str:
    out = f"{keyword:<8}"
    for v in values:
        v = "" if v is None else str(v)
        if len(v) > 8:
            raise ValueError(f"{keyword}: value {v!r} does not fit an 8-character field")
        out += f"{v:>8}"
    return out.rstrip()


def write_bdf(deck, selection=None) -> str:
    """Small-field deck for ``selection`` (all elements when ``None``)."""
    if isinstance(deck, Mesh):
        deck = BulkDeck(deck)
    mesh = deck.mesh
    ids = sorted(mesh.elements) if selection is None else sorted(set(selection))
    if not ids:
        raise ValueError("a panel deck must contain elements")
    unknown = [e for e in ids if e not in mesh.elements]
    if unknown:
        raise ValueError(f"selection lists unknown elements {unknown[:5]}")
    used = sorted({n for e in ids for n in mesh.elements[e].nodes})
    lines = ["$ panelize bulk data"]
    for nid in used:
        xyz = mesh.nodes[nid]
        coords = [None] * 3 if xyz is None else [format_real(c) for c in xyz]
        lines.append(_card("GRID", [nid, None] + coords))
    for eid in ids:
        elem = mesh.elements[eid]
        keyword = "CTRIA3" if elem.kind is ElementKind.TRI else "CQUAD4"
        lines.append(_card(keyword, [eid, deck.property_ids.get(eid, 1)] + list(elem.nodes)))
    lines.append("ENDDATA")
    return "\n".join(lines) + "\n"


def read_bdf(path) -> BulkDeck:
    return parse_bdf(Path(path).read_text())


# -- native JSON mesh ----------------------------------------------------------

def mesh_to_dict(mesh: Mesh, property_ids: Optional[dict] = None) -> dict:
    nodes = []
    for nid in sorted(mesh.nodes):
        xyz = mesh.nodes[nid]
        nodes.append([nid] if xyz is None else [nid, *xyz])
    elements = []
    for eid in sorted(mesh.elements):
        e = mesh.elements[eid]
        rec = {"id": eid, "kind": e.kind.name, "nodes": list(e.nodes)}
        if property_ids and eid in property_ids:
            rec["pid"] = property_ids[eid]
        elements.append(rec)
    out = {"format_version": 1, "nodes": nodes, "elements": elements}
    if mesh.tags:
        out["tags"] = {k: sorted(v) for k, v in sorted(mesh.tags.items())}
    return out


def mesh_from_dict(doc: dict) -> BulkDeck:
    if doc.get("format_version") != 1:
        raise BdfParseError(f"unsupported mesh format_version {doc.get('format_version')!r}")
    try:
        nodes = {int(rec[0]): (tuple(rec[1:4]) if len(rec) > 1 else None) for rec in doc["nodes"]}
        elems, pids = [], {}
        for rec in doc["elements"]:
            elems.append(Element(int(rec["id"]), ElementKind[rec["kind"]], tuple(rec["nodes"])))
            if "pid" in rec:
                pids[int(rec["id"])] = int(rec["pid"])
        mesh = Mesh.from_elements(nodes, elems, doc.get("tags", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise BdfParseError(f"malformed JSON mesh: {exc}") from None
    return BulkDeck(mesh, pids)


def load_mesh(path) -> BulkDeck:
    """Read a mesh from a ``.json`` document or a bulk-data deck."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise BdfParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
        return mesh_from_dict(doc)
    return read_bdf(path)


def save_mesh(deck, path):
    path = Path(path)
    if isinstance(deck, Mesh):
        deck = BulkDeck(deck)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(mesh_to_dict(deck.mesh, deck.property_ids), indent=1) + "\n")
    else:
        path.write_text(write_bdf(deck))

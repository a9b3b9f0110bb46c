"""Decomposition manifest: panels plus whatever later stages append.

Panels round-trip as :class:`~panelize.extract.Panel` objects. Stiffener,
design and history sections are kept as plain JSON-ready records since they
are produced (and read back) by their own modules.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import ManifestError
from .extract import Panel, PanelBoundary

FORMAT_VERSION = 1


@lru_cache(maxsize=1)
def manifest_schema() -> dict:
    text = resources.files(__package__).joinpath("manifest_schema.json").read_text()
    return json.loads(text)


@dataclass
class Manifest:
    panels: list = field(default_factory=list)
    curves: Optional[list] = None
    stiffeners: Optional[dict] = None
    design_variables: Optional[list] = None
    history: Optional[list] = None
    status: Optional[str] = None

    def panel(self, pid: int) -> Panel:
        for p in self.panels:
            if p.id == pid:
                return p
        raise KeyError(pid)


def panel_to_dict(panel: Panel) -> dict:
    rec = {
        "id": panel.id,
        "elements": sorted(panel.elements),
        "nodes": sorted(panel.nodes),
        "boundary": list(panel.boundary.loop),
    }
    if panel.boundary.holes:
        rec["holes"] = [list(h) for h in panel.boundary.holes]
    return rec


def panel_from_dict(rec: dict) -> Panel:
    holes = tuple(tuple(h) for h in rec.get("holes", ()))
    return Panel(rec["id"], frozenset(rec["elements"]), frozenset(rec["nodes"]),
                 PanelBoundary(tuple(rec["boundary"]), holes))


def manifest_to_dict(m: Manifest) -> dict:
    doc = {"format_version": FORMAT_VERSION,
           "panels": [panel_to_dict(p) for p in sorted(m.panels, key=lambda p: p.id)]}
    for key in ("curves", "stiffeners", "design_variables", "history", "status"):
        value = getattr(m, key)
        if value is not None:
            doc[key] = value
    return doc


def validate_manifest(doc) -> None:
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ManifestError(f"unknown manifest format_version {version!r} (expected {FORMAT_VERSION})")
    try:
        jsonschema.validate(doc, manifest_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ManifestError(f"manifest schema violation at {where}: {exc.message}") from None
    ids = [p["id"] for p in doc["panels"]]
    if len(set(ids)) != len(ids):
        raise ManifestError("manifest lists a panel id more than once")


def manifest_from_dict(doc: dict) -> Manifest:
    validate_manifest(doc)
    return Manifest(
        panels=[panel_from_dict(rec) for rec in doc["panels"]],
        curves=doc.get("curves"),
        stiffeners=doc.get("stiffeners"),
        design_variables=doc.get("design_variables"),
        history=doc.get("history"),
        status=doc.get("status"),
    )


def dumps_manifest(m: Manifest) -> str:
    doc = manifest_to_dict(m)
    validate_manifest(doc)
    # sorted keys and fixed separators keep the output byte-stable
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads_manifest(text: str) -> Manifest:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return manifest_from_dict(doc)


def write_manifest(m: Manifest, path) -> None:
    Path(path).write_text(dumps_manifest(m))


def read_manifest(path) -> Manifest:
    return loads_manifest(Path(path).read_text())

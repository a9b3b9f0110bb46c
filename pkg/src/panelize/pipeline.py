"""Manifest-to-manifest steps shared by the command line and scripts.

Each function takes and returns plain library objects; the CLI only adds
file handling and exit codes on top.
"""
from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .config import SizingConfig, build_specs
from .errors import BdfParseError, TopologyError
from .extract import DividingCurve, decompose
from .globalloop import LoopResult, design_record, run_global_local
from .manifest import Manifest
from .mesh import Mesh, build_adjacency
from .stiffeners import stiffen


def read_curves(path) -> list:
    """Dividing curves from a JSON list of node-id arrays."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BdfParseError(f"invalid curves JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, list) or not all(
            isinstance(c, list) and all(isinstance(n, int) and not isinstance(n, bool) for n in c)
            for c in doc):
        raise BdfParseError("curves file must be a JSON list of node-id arrays")
    return doc


def decompose_mesh(mesh: Mesh, curves) -> Manifest:
    curves = [list(c.nodes if isinstance(c, DividingCurve) else c) for c in curves]
    index = build_adjacency(mesh)
    panels = decompose(mesh, index, curves)
    return Manifest(panels=panels, curves=curves or None)


def stiffen_manifest(manifest: Manifest, stiffener_mesh: Mesh) -> Manifest:
    """Attach the stiffener association; an empty stiffener mesh changes nothing."""
    if not stiffener_mesh.elements:
        return manifest
    if not manifest.panels:
        raise TopologyError("manifest has no panels to attach stiffeners to")
    layout = stiffen(manifest.panels, stiffener_mesh)
    return replace(manifest, stiffeners=layout.to_record())


def chain_counts(manifest: Manifest) -> dict:
    counts: dict = {}
    for c in (manifest.stiffeners or {}).get("chains", []):
        counts[c["panel"]] = counts.get(c["panel"], 0) + 1
    return counts


def optimize_manifest(manifest: Manifest, cfg: SizingConfig, mesh: Optional[Mesh] = None,
                      seed: int = 0, workers: int = 1) -> tuple:
    """Run the global/local loop over the manifest panels.

    Returns ``(manifest with design_variables/history/status, LoopResult)``.
    """
    if not manifest.panels:
        raise TopologyError("manifest has no panels to size")
    specs = build_specs(manifest.panels, cfg, mesh, chain_counts(manifest))
    result: LoopResult = run_global_local(specs, cfg.make_provider(),
                                          cfg.loop_config(seed=seed, workers=workers),
                                          analyzer=cfg.analyzer(), constraints=cfg.constraints)
    n_stiff = {s.panel_id: s.geom.n_stiff for s in specs}
    history = [rec.to_record() for rec in result.history]
    final = result.final
    designs = None
    if final is not None:
        designs = [design_record(pid, final.designs[pid], n_stiff[pid]) for pid in sorted(final.designs)]
    out = replace(manifest, design_variables=designs, history=history, status=result.status)
    return out, result

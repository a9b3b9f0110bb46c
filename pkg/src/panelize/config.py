"""Sizing configuration files (YAML or JSON) and loop-input assembly.

A config holds the material, design bounds, load provider, loop settings and
optional per-panel overrides::

    material: {E: 71.0e9, nu: 0.33, rho: 2800, sigma_y: 345.0e6}
    bounds: {t: [0.001, 0.02], t_stiff: [0.001, 0.01], h_stiff: [0.005, 0.06]}
    provider: {type: constant, loads: {nx: -5.0e5}}      # or
    provider: {type: redistribution, total_force: 2.0e5, shear_flow: 0}
    loop: {convergence_threshold_pct: 0.5, max_iterations: 10}
    search: {n_starts: 8, min_step: 1.0e-6}
    constraints: {lambda_min: 1.05, tol: 0}
    analysis: {n_terms: 12}
    panels:
      2: {geometry: {a: 0.8, b: 0.4, area: 0.32, n_stiff: 2, stiff_length: 0.8},
          material: {...}, bounds: {...}, loads: {nx: -1.0e5}}

Panel geometry not given in the config is measured from the mesh
coordinates (see :func:`geometry_from_panel`). Seed and worker count come
from the caller, not the file.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .errors import AnalysisError, ConfigError, OptimizationError
from .globalloop import ConstantLoads, LoopConfig, PanelSpec, StiffnessRedistribution
from .mesh import Mesh
from .optimizer import SearchConfig
from .sizing import (ALUMINUM, Constraints, DesignBounds, Material, PanelGeometry, PanelLoads,
                     SmearedPlateSurrogate)

_TOP_KEYS = {"material", "bounds", "provider", "loop", "search", "constraints", "analysis", "panels"}
_PANEL_KEYS = {"geometry", "material", "bounds", "loads"}


@dataclass
class SizingConfig:
    material: Material = ALUMINUM
    bounds: DesignBounds = DesignBounds((1e-3, 20e-3), (1e-3, 10e-3), (5e-3, 60e-3))
    provider: dict = field(default_factory=lambda: {"type": "constant", "loads": {}})
    loop: dict = field(default_factory=dict)
    search: SearchConfig = SearchConfig()
    constraints: Constraints = Constraints()
    n_terms: int = 12
    panels: dict = field(default_factory=dict)      # panel id -> override dict

    def loop_config(self, seed: int = 0, workers: int = 1) -> LoopConfig:
        return LoopConfig(seed=seed, worker_count=workers, search=self.search, **self.loop)

    def analyzer(self):
        return SmearedPlateSurrogate(n_terms=self.n_terms)

    def make_provider(self):
        kind = self.provider.get("type", "constant")
        if kind == "constant":
            per_panel = {pid: _loads(o["loads"]) for pid, o in self.panels.items() if "loads" in o}
            return ConstantLoads(per_panel, _loads(self.provider.get("loads", {})))
        if kind == "redistribution":
            return StiffnessRedistribution(float(self.provider["total_force"]),
                                           float(self.provider.get("shear_flow", 0.0)))
        raise ConfigError(f"unknown provider type {kind!r}")


def _keyed(cls, doc, what):
    if not isinstance(doc, dict):
        raise ConfigError(f"{what} must be a mapping")
    names = {f.name for f in fields(cls)}
    extra = set(doc) - names
    if extra:
        raise ConfigError(f"unknown {what} key(s) {sorted(extra)}")
    # PyYAML reads 5e5 (no dot) as a string
    doc = {k: _number(v) for k, v in doc.items()}
    try:
        return cls(**doc)
    except (TypeError, ValueError, AnalysisError) as exc:
        raise ConfigError(f"bad {what}: {exc}") from None


def _number(v):
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError:
            return v
    if isinstance(v, (list, tuple)):
        return tuple(_number(x) for x in v)
    return v


def _loads(doc) -> PanelLoads:
    return _keyed(PanelLoads, doc, "loads")


def _bounds(doc) -> DesignBounds:
    if not isinstance(doc, dict):
        raise ConfigError("bounds must be a mapping")
    return _keyed(DesignBounds, {k: tuple(v) for k, v in doc.items()}, "bounds")


def config_from_dict(doc: Optional[dict]) -> SizingConfig:
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown config key(s) {sorted(extra)}")
    cfg = SizingConfig()
    if "material" in doc:
        cfg.material = _keyed(Material, doc["material"], "material")
    if "bounds" in doc:
        cfg.bounds = _bounds(doc["bounds"])
    if "provider" in doc:
        cfg.provider = dict(doc["provider"])
    loop = dict(doc.get("loop", {}))
    bad = set(loop) - {"convergence_threshold_pct", "max_iterations"}
    if bad:
        raise ConfigError(f"unknown loop key(s) {sorted(bad)}")
    try:
        LoopConfig(**loop)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad loop settings: {exc}") from None
    cfg.loop = loop
    if "search" in doc:
        cfg.search = _keyed(SearchConfig, doc["search"], "search")
    if "constraints" in doc:
        cfg.constraints = _keyed(Constraints, doc["constraints"], "constraints")
    cfg.n_terms = int(doc.get("analysis", {}).get("n_terms", 12))
    for key, over in (doc.get("panels") or {}).items():
        if not isinstance(over, dict) or set(over) - _PANEL_KEYS:
            raise ConfigError(f"panel {key}: overrides must be a mapping with keys {sorted(_PANEL_KEYS)}")
        parsed = {}
        if "geometry" in over:
            parsed["geometry"] = _keyed(PanelGeometry, over["geometry"], f"panel {key} geometry")
        if "material" in over:
            parsed["material"] = _keyed(Material, over["material"], f"panel {key} material")
        if "bounds" in over:
            parsed["bounds"] = _bounds(over["bounds"])
        if "loads" in over:
            parsed["loads"] = over["loads"]
            _loads(over["loads"])
        cfg.panels[int(key)] = parsed
    cfg.make_provider()  # fail early on a bad provider block
    return cfg


def load_config(path) -> SizingConfig:
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text) if path.suffix.lower() == ".json" else yaml.safe_load(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {exc}", mark.line + 1 if mark else None) from None
    return config_from_dict(doc)


# -- geometry --------------------------------------------------------------

def _element_area(pts: np.ndarray) -> float:
    # fan triangulation; exact for planar convex quads
    total = 0.0
    for i in range(1, len(pts) - 1):
        total += 0.5 * np.linalg.norm(np.cross(pts[i] - pts[0], pts[i + 1] - pts[0]))
    return float(total)


def geometry_from_panel(mesh: Mesh, panel, n_stiff: int = 0) -> PanelGeometry:
    """Equivalent rectangle of a panel from its nodal coordinates.

    The panel's best-fit plane is found from its nodes. ``a`` is the extent
    along the global x axis projected into that plane (stiffeners run along
    x), ``b`` the in-plane extent across it. ``area`` is the summed element
    area and the stiffeners are taken to run the full length ``a``.
    """
    nodes = sorted(panel.nodes)
    if any(mesh.nodes.get(n) is None for n in nodes):
        raise AnalysisError(f"panel {panel.id}: geometry needs nodal coordinates")
    xyz = np.array([mesh.nodes[n] for n in nodes], dtype=float)
    centred = xyz - xyz.mean(axis=0)
    normal = np.linalg.svd(centred, full_matrices=False)[2][-1]
    u = None
    for axis in np.eye(3):
        u = axis - (axis @ normal) * normal
        if np.linalg.norm(u) > 1e-6:
            break
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    a, b = float(np.ptp(centred @ u)), float(np.ptp(centred @ v))
    area = math.fsum(_element_area(np.array([mesh.nodes[n] for n in mesh.elements[e].nodes]))
                     for e in sorted(panel.elements))
    return PanelGeometry(a=a, b=b, area=area, n_stiff=n_stiff, stiff_length=a)


def build_specs(panels, cfg: SizingConfig, mesh: Optional[Mesh] = None,
                chain_counts: Optional[dict] = None) -> list:
    """One :class:`PanelSpec` per panel, applying the config overrides."""
    chain_counts = chain_counts or {}
    unknown = set(cfg.panels) - {p.id for p in panels}
    if unknown:
        raise ConfigError(f"config overrides unknown panel(s) {sorted(unknown)}")
    specs = []
    for p in sorted(panels, key=lambda p: p.id):
        over = cfg.panels.get(p.id, {})
        geom = over.get("geometry")
        if geom is None:
            if mesh is None or any(mesh.nodes.get(n) is None for n in p.nodes):
                raise OptimizationError(f"panel {p.id}: no geometry in the config and no "
                                        "nodal coordinates to measure it from")
            geom = geometry_from_panel(mesh, p, chain_counts.get(p.id, 0))
        specs.append(PanelSpec(p.id, geom, over.get("material", cfg.material),
                               over.get("bounds", cfg.bounds)))
    return specs

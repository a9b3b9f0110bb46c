"""Connectivity-only panel decomposition of shell meshes and stiffened-panel sizing."""

__version__ = "0.1.0"

from .bdf import load_mesh, parse_bdf, read_bdf, save_mesh, write_bdf
from .extract import (DividingCurve, Panel, PanelBoundary, decompose, extract_panel,
                      oracle_side_fill)
from .globalloop import LoopConfig, PanelSpec, run_global_local
from .manifest import Manifest, read_manifest, write_manifest
from .mesh import Element, Mesh, build_adjacency
from .optimizer import optimize_panel
from .sizing import (DesignBounds, Material, PanelDesign, PanelGeometry, PanelLoads,
                     analyze_panel, count_design_variables)
from .stiffeners import associate_stiffeners, build_chains, stiffen

__all__ = [
    "load_mesh", "parse_bdf", "read_bdf", "save_mesh", "write_bdf",
    "DividingCurve", "Panel", "PanelBoundary", "decompose", "extract_panel", "oracle_side_fill",
    "LoopConfig", "PanelSpec", "run_global_local",
    "Manifest", "read_manifest", "write_manifest",
    "Element", "Mesh", "build_adjacency",
    "optimize_panel",
    "DesignBounds", "Material", "PanelDesign", "PanelGeometry", "PanelLoads", "analyze_panel",
    "count_design_variables",
    "associate_stiffeners", "build_chains", "stiffen",
]

"""Command line front end.

    panelize decompose --mesh skin.bdf --curves curves.json --out panels.json
    panelize stiffen   --manifest panels.json --mesh stiffeners.bdf --out stiffened.json
    panelize optimize  --manifest stiffened.json --config sizing.yaml [--mesh skin.bdf]
    panelize render    --mesh skin.bdf --manifest panels.json --out panels.svg
    panelize info      --mesh skin.bdf | --manifest panels.json

Exit codes: 0 ok, 1 parse error or missing file, 2 topology, 3 optimization,
4 rendering. ``PANELIZE_LOG`` sets the log level (default WARNING).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .bdf import load_mesh
from .config import load_config
from .errors import (AnalysisError, BdfParseError, ConfigError, ManifestError, MeshError,
                     OptimizationError, TopologyError)
from .globalloop import CONVERGED, MAX_ITERATIONS, default_workers
from .manifest import Manifest, dumps_manifest, read_manifest
from .pipeline import decompose_mesh, optimize_manifest, read_curves, stiffen_manifest
from .render import RenderError, RenderOptions, render_svg

EXIT_OK, EXIT_PARSE, EXIT_TOPOLOGY, EXIT_OPTIMIZATION, EXIT_RENDER = 0, 1, 2, 3, 4

log = logging.getLogger("panelize")


class _Usage(Exception):
    pass


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise _Usage(f"{args.command} needs --{name.replace('_', '-')}")
    return value


def _write(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_decompose(args) -> int:
    mesh = load_mesh(_need(args, "mesh")).mesh
    curves = read_curves(args.curves) if args.curves else []
    manifest = decompose_mesh(mesh, curves)
    _write(dumps_manifest(manifest), args.out or args.manifest)
    total = sum(len(p.elements) for p in manifest.panels)
    print(f"{len(manifest.panels)} panels, {total} of {len(mesh.elements)} elements", file=sys.stderr)
    for p in manifest.panels:
        print(f"  panel {p.id}: {len(p.elements)} elements", file=sys.stderr)
    return EXIT_OK


def cmd_stiffen(args) -> int:
    src = _need(args, "manifest")
    manifest = read_manifest(src)
    deck = load_mesh(_need(args, "mesh"))
    out = stiffen_manifest(manifest, deck.mesh)
    _write(dumps_manifest(out), args.out or src)
    rec = out.stiffeners or {}
    print(f"{len(rec.get('chains', []))} chains, {len(rec.get('ambiguous', []))} ambiguous quads, "
          f"{len(rec.get('unassigned', []))} unassigned", file=sys.stderr)
    for w in rec.get("warnings", []):
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_optimize(args) -> int:
    src = _need(args, "manifest")
    manifest = read_manifest(src)
    cfg = load_config(_need(args, "config"))
    mesh = load_mesh(args.mesh).mesh if args.mesh else None
    workers = args.workers if args.workers is not None else default_workers()
    out, result = optimize_manifest(manifest, cfg, mesh, seed=args.seed, workers=workers)
    _write(dumps_manifest(out), args.out or src)
    for rec in result.history:
        delta = "-" if rec.delta_pct is None else f"{rec.delta_pct:+.4f}%"
        print(f"iteration {rec.iteration}: {rec.total_weight:.6g} kg ({delta})", file=sys.stderr)
        for flag in rec.global_flags:
            print(f"  flag: {flag}", file=sys.stderr)
    print(f"status: {result.status}", file=sys.stderr)
    if result.error:
        print(f"error: {result.error}", file=sys.stderr)
    return EXIT_OK if result.status in (CONVERGED, MAX_ITERATIONS) else EXIT_OPTIMIZATION


def cmd_render(args) -> int:
    mesh = load_mesh(_need(args, "mesh")).mesh
    manifest = read_manifest(args.manifest) if args.manifest else Manifest()
    stiff = load_mesh(args.stiffener_mesh).mesh if args.stiffener_mesh else None
    opts = RenderOptions(color_by=args.color_by, stroke_width=args.stroke_width, size=args.size)
    _write(render_svg(mesh, manifest, opts, stiff), args.out)
    return EXIT_OK


def cmd_info(args) -> int:
    if args.mesh is None and args.manifest is None:
        raise _Usage("info needs --mesh and/or --manifest")
    if args.mesh:
        deck = load_mesh(args.mesh)
        kinds = {}
        for e in deck.mesh.elements.values():
            kinds[e.kind.name] = kinds.get(e.kind.name, 0) + 1
        print(f"mesh {args.mesh}: {len(deck.mesh.nodes)} nodes, {len(deck.mesh.elements)} elements "
              + ", ".join(f"{k}={v}" for k, v in sorted(kinds.items())))
        print(f"  coordinates: {'yes' if deck.mesh.has_coordinates else 'no'}")
        for w in deck.warnings:
            print(f"  warning: {w}")
    if args.manifest:
        m = read_manifest(args.manifest)
        print(f"manifest {args.manifest}: {len(m.panels)} panels, "
              f"{sum(len(p.elements) for p in m.panels)} elements")
        for p in m.panels:
            holes = f", {len(p.boundary.holes)} holes" if p.boundary.holes else ""
            print(f"  panel {p.id}: {len(p.elements)} elements, {len(p.nodes)} nodes{holes}")
        if m.stiffeners:
            print(f"  stiffener chains: {len(m.stiffeners['chains'])}")
        if m.history:
            last = m.history[-1]
            print(f"  sizing: {len(m.history)} iterations, {last['total_weight']:.6g} kg, "
                  f"status {m.status}")
    return EXIT_OK


COMMANDS = {"decompose": cmd_decompose, "stiffen": cmd_stiffen, "optimize": cmd_optimize,
            "render": cmd_render, "info": cmd_info}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="panelize", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"panelize {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--mesh", help="bulk-data deck (.bdf) or JSON mesh")
        s.add_argument("--curves", help="JSON list of node-id arrays")
        s.add_argument("--manifest", help="panel manifest (JSON)")
        s.add_argument("--config", help="sizing config (YAML or JSON)")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: available CPUs)")
        s.add_argument("--out", help="output file (default: stdout or the input manifest)")
        if name == "render":
            s.add_argument("--color-by", choices=("panel", "chain", "none"), default="panel")
            s.add_argument("--stroke-width", type=float, default=1.0)
            s.add_argument("--size", type=int, default=800)
            s.add_argument("--stiffener-mesh", help="stiffener deck, for --color-by chain")
    return p


def _exit_code(exc) -> int:
    if isinstance(exc, RenderError):
        return EXIT_RENDER
    if isinstance(exc, TopologyError):
        return EXIT_TOPOLOGY
    if isinstance(exc, (OptimizationError, AnalysisError)):
        return EXIT_OPTIMIZATION
    return EXIT_PARSE


def main(argv=None) -> int:
    level = os.environ.get("PANELIZE_LOG", "WARNING").upper()
    logging.basicConfig(level=level if isinstance(logging.getLevelName(level), int) else "WARNING",
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.workers is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[args.command](args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (OSError, BdfParseError, ManifestError, ConfigError, MeshError, TopologyError,
            OptimizationError, AnalysisError, RenderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end run on a synthetic upper-skin strip.

Builds a triangulated skin, cuts it into bays along rib and spar lines,
stands blade stiffeners on it, sizes every bay in the global/local loop and
writes the decks, manifests and an SVG into ``--out``.

    python scripts/wingbox_demo.py --out demo_out --workers 2
"""
import argparse
import logging
from pathlib import Path

from panelize.bdf import save_mesh
from panelize.config import config_from_dict
from panelize.fixtures import grid_node, quad_strip, structured_mesh
from panelize.manifest import write_manifest
from panelize.mesh import Mesh
from panelize.pipeline import decompose_mesh, optimize_manifest, stiffen_manifest
from panelize.render import RenderOptions, render_svg
from panelize.sizing import count_design_variables

ROWS, COLS = 8, 30            # cells; 0.125 m x 0.1 m each
RIB_COLS = (6, 12, 18, 24)    # rib stations -> 5 bays spanwise
SPAR_ROWS = (4,)              # a mid spar -> 2 bays chordwise
STIFFENER_ROWS = (2, 6)       # one blade per chordwise bay


def skin():
    return structured_mesh(ROWS, COLS, dx=0.1, dy=0.125)


def curves():
    out = [[grid_node(r, c, COLS) for r in range(ROWS + 1)] for c in RIB_COLS]
    out += [[grid_node(r, c, COLS) for c in range(COLS + 1)] for r in SPAR_ROWS]
    return out


def stiffeners(mesh):
    nodes, elems = {}, []
    bays = (0,) + RIB_COLS + (COLS,)
    k = 0
    for r in STIFFENER_ROWS:
        for c0, c1 in zip(bays, bays[1:]):
            path = [grid_node(r, c, COLS) for c in range(c0, c1 + 1)]
            n, e = quad_strip(10000 + 100 * k, path, 50000 + 100 * k, height=0.03, coords=mesh.nodes)
            nodes.update(n)
            elems += e
            k += 1
    return Mesh.from_elements(nodes, elems, {"stiffeners": {e.id for e in elems}})


CONFIG = {
    "material": {"E": 71e9, "nu": 0.33, "rho": 2800.0, "sigma_y": 345e6},
    "bounds": {"t": [1e-3, 20e-3], "t_stiff": [1e-3, 10e-3], "h_stiff": [5e-3, 40e-3]},
    "provider": {"type": "redistribution", "total_force": 2e5},
    "loop": {"convergence_threshold_pct": 0.5, "max_iterations": 8},
    "search": {"n_starts": 4, "min_step": 1e-4},
    "analysis": {"n_terms": 6},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", default="demo_out")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    logging.basicConfig(level="INFO", format="%(name)s: %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    mesh = skin()
    stiff = stiffeners(mesh)
    save_mesh(mesh, out / "skin.bdf")
    save_mesh(stiff, out / "stiffeners.bdf")

    manifest = decompose_mesh(mesh, curves())
    print(f"{len(manifest.panels)} panels from {len(mesh.elements)} triangles")
    manifest = stiffen_manifest(manifest, stiff)
    print(f"{len(manifest.stiffeners['chains'])} stiffener chains")
    print(f"design variables for {len(SPAR_ROWS)} spar(s), {len(RIB_COLS)} ribs:",
          count_design_variables(len(SPAR_ROWS), len(RIB_COLS)))

    sized, result = optimize_manifest(manifest, config_from_dict(CONFIG), mesh,
                                      seed=args.seed, workers=args.workers)
    for rec in result.history:
        delta = "-" if rec.delta_pct is None else f"{rec.delta_pct:+.3f}%"
        print(f"iteration {rec.iteration}: {rec.total_weight:.4f} kg ({delta}), "
              f"{len(rec.global_flags)} global flags")
    print("status:", result.status)
    write_manifest(sized, out / "manifest.json")
    (out / "panels.svg").write_text(render_svg(mesh, sized))
    (out / "chains.svg").write_text(render_svg(mesh, sized, RenderOptions(color_by="chain"), stiff))
    print("wrote", ", ".join(sorted(p.name for p in out.iterdir())))


if __name__ == "__main__":
    main()

"""Synthetic structured meshes used by tests, scripts and demos.

Node ids on a ``rows x cols`` cell grid follow ``row * (cols + 1) + col + 1``.
With the default split each cell ``(a, b, c, d)`` (a lower-left, b
lower-right, c upper-left, d upper-right) becomes TRI(a, b, d) with id
``2 * (row * cols + col) + 1`` and TRI(a, d, c) with the next id. The
``2 x 4`` case is the reference mesh used throughout the tests.
"""
from __future__ import annotations

import numpy as np

from .mesh import Element, Mesh


def grid_node(row: int, col: int, cols: int) -> int:
    return row * (cols + 1) + col + 1


def structured_mesh(rows: int, cols: int, *, flip=None, element_ids=None,
                    dx: float = 1.0, dy: float = 1.0, coordinates: bool = True) -> Mesh:
    """Triangulated ``rows x cols`` cell grid.

    ``flip`` is an optional boolean array ``(rows, cols)``; flipped cells use
    the b-c diagonal, i.e. TRI(a, b, c) + TRI(b, d, c). ``element_ids`` maps the
    default ids to new ones (a relabeling).
    """
    if rows < 1 or cols < 1:
        raise ValueError("need at least one cell")
    nodes = {}
    for r in range(rows + 1):
        for c in range(cols + 1):
            nodes[grid_node(r, c, cols)] = (c * dx, r * dy, 0.0) if coordinates else None
    elems = []
    for r in range(rows):
        for c in range(cols):
            a = grid_node(r, c, cols)
            b, cc, d = a + 1, a + cols + 1, a + cols + 2
            e1 = 2 * (r * cols + c) + 1
            if flip is not None and flip[r][c]:
                pair = ((a, b, cc), (b, d, cc))
            else:
                pair = ((a, b, d), (a, d, cc))
            for k, tri in enumerate(pair):
                eid = e1 + k
                if element_ids is not None:
                    eid = element_ids[eid]
                elems.append(Element.tri(eid, *tri))
    return Mesh.from_elements(nodes, elems, {"skin": {e.id for e in elems}})


def reference_mesh(coordinates: bool = True) -> Mesh:
    """The 3 x 5 node, 16 triangle reference mesh."""
    return structured_mesh(2, 4, coordinates=coordinates)


def random_structured_mesh(rng: np.random.Generator, rows: int, cols: int,
                           flip_fraction: float = 0.5, relabel: bool = True) -> Mesh:
    """Structured mesh with random diagonals and (optionally) shuffled element ids."""
    flip = rng.random((rows, cols)) < flip_fraction
    ids = None
    if relabel:
        n = 2 * rows * cols
        perm = rng.permutation(n) + 1
        # sparse, shuffled ids: the walk must not rely on contiguous numbering
        ids = {i + 1: int(perm[i]) * 3 + 7 for i in range(n)}
    return structured_mesh(rows, cols, flip=flip, element_ids=ids)


def quad_strip(first_id: int, skin_path, new_node_start: int, height: float = 0.1,
               coords=None):
    """Blade-stiffener quads standing on a skin node path.

    Each quad shares exactly the two nodes of one skin edge with the skin. The
    new (top) nodes get ids from ``new_node_start``. Returns ``(nodes, elements)``
    where ``nodes`` maps every used id to a coordinate (or ``None`` without
    ``coords``).
    """
    top = {n: new_node_start + i for i, n in enumerate(skin_path)}
    nodes = {}
    for n in skin_path:
        if coords is not None and coords.get(n) is not None:
            x, y, z = coords[n]
            nodes[n] = (x, y, z)
            nodes[top[n]] = (x, y, z + height)
        else:
            nodes[n] = None
            nodes[top[n]] = None
    elems = []
    for i in range(len(skin_path) - 1):
        u, v = skin_path[i], skin_path[i + 1]
        elems.append(Element.quad(first_id + i, u, v, top[v], top[u]))
    return nodes, elems


# skin paths of the three stiffeners laid on R: one in each panel of the
# mid-row split and one crossing the dividing curve along edge {9, 10}
REFERENCE_STIFFENER_PATHS = ((1, 2, 3), (11, 12, 13, 14), (4, 9, 10, 15))


def reference_stiffeners(coordinates: bool = True) -> Mesh:
    """Quad-only stiffener mesh for R (ids 101.., 201.., 301..)."""
    skin = reference_mesh(coordinates)
    nodes, elems = {}, []
    for k, path in enumerate(REFERENCE_STIFFENER_PATHS, start=1):
        n, e = quad_strip(100 * k + 1, path, 1000 * k + 1,
                          coords=dict(skin.nodes) if coordinates else None)
        nodes.update(n)
        elems.extend(e)
    return Mesh.from_elements(nodes, elems, {"stiffeners": [e.id for e in elems]})


def reference_panel_problem():
    """Aluminium 0.5 m x 0.5 m panel with three blade stiffeners along x.

    The compressive running load makes the lower-bound design infeasible.
    Returns ``(material, loads, geometry, bounds)``.
    """
    from .sizing import ALUMINUM, DesignBounds, PanelGeometry, PanelLoads
    geom = PanelGeometry(a=0.5, b=0.5, area=0.25, n_stiff=3, stiff_length=0.5)
    bounds = DesignBounds(t=(1e-3, 20e-3), t_stiff=(1e-3, 10e-3), h_stiff=(5e-3, 60e-3))
    return ALUMINUM, PanelLoads(nx=-5e5), geom, bounds


def toy_wingbox():
    """Two aluminium skin bays sharing an axial force (the load-redistribution fixture).

    Bay 1 is 0.5 m square with one stiffener, bay 2 is 0.8 m x 0.4 m with two.
    Returns ``(specs, provider, loop_config)`` for
    :func:`panelize.globalloop.run_global_local`; the search settings are
    coarsened so the whole loop runs in about a second.
    """
    from .globalloop import LoopConfig, PanelSpec, StiffnessRedistribution
    from .optimizer import SearchConfig
    from .sizing import ALUMINUM, DesignBounds, PanelGeometry
    bounds = DesignBounds(t=(1e-3, 20e-3), t_stiff=(1e-3, 10e-3), h_stiff=(5e-3, 20e-3))
    specs = [PanelSpec(1, PanelGeometry(0.5, 0.5, 0.25, 1, 0.5), ALUMINUM, bounds),
             PanelSpec(2, PanelGeometry(0.8, 0.4, 0.32, 2, 0.8), ALUMINUM, bounds)]
    cfg = LoopConfig(convergence_threshold_pct=0.5, max_iterations=10,
                     search=SearchConfig(n_starts=4, min_step=1e-4))
    return specs, StiffnessRedistribution(total_force=2e5), cfg


def toy_wingbox_config() -> dict:
    """The :func:`toy_wingbox` problem as a sizing config document.

    Paired with the mid-row split of the reference mesh (panels 1 and 2) it
    drives ``panelize optimize`` through the same loop as the library call.
    """
    return {
        "material": {"E": 71e9, "nu": 0.33, "rho": 2800.0, "sigma_y": 345e6},
        "bounds": {"t": [1e-3, 20e-3], "t_stiff": [1e-3, 10e-3], "h_stiff": [5e-3, 20e-3]},
        "provider": {"type": "redistribution", "total_force": 2e5},
        "loop": {"convergence_threshold_pct": 0.5, "max_iterations": 10},
        "search": {"n_starts": 4, "min_step": 1e-4},
        "panels": {
            1: {"geometry": {"a": 0.5, "b": 0.5, "area": 0.25, "n_stiff": 1, "stiff_length": 0.5}},
            2: {"geometry": {"a": 0.8, "b": 0.4, "area": 0.32, "n_stiff": 2, "stiff_length": 0.8}},
        },
    }

"""Panel extraction from a shell mesh using connectivity alone.

The building block is a *fan rotation*: standing on a node inside an element,
step across the element's other edge at that node into the neighbouring
element, and repeat until an edge flagged as a wall is reached. Chaining
rotations along a node loop walks the elements lining one side of it. The
periphery walk, the mid-element walk and the boundary tracing used by
:func:`decompose` are all built on it; none of them reads a coordinate.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import OpenBoundaryError, PartitionError, TopologyError, WalkError
from .mesh import (AdjacencyIndex, Mesh, edge_key, elements_sharing_at_least,
                   loop_edges, path_edges)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DividingCurve:
    """Ordered node path along mesh edges."""

    nodes: tuple

    def __post_init__(self):
        nodes = tuple(int(n) for n in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if len(nodes) < 2:
            raise TopologyError("a dividing curve needs at least 2 nodes")
        if len(set(nodes)) != len(nodes):
            raise TopologyError(f"dividing curve repeats a node: {nodes}")

    def edges(self) -> list:
        return path_edges(self.nodes)

    def check(self, index: AdjacencyIndex):
        for u, v in zip(self.nodes, self.nodes[1:]):
            if not index.has_edge(u, v):
                raise WalkError(f"curve discontinuity: nodes {u} and {v} do not share an element edge")


@dataclass(frozen=True)
class PanelBoundary:
    """Closed node loop around a panel, plus optional inner (hole) loops."""

    loop: tuple
    holes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "loop", tuple(int(n) for n in self.loop))
        object.__setattr__(self, "holes", tuple(tuple(int(n) for n in h) for h in self.holes))

    def wall_edges(self) -> set:
        walls = loop_edges(self.loop)
        for h in self.holes:
            walls |= loop_edges(h)
        return walls

    def check(self, index: AdjacencyIndex):
        for ring in (self.loop,) + self.holes:
            if len(ring) < 3:
                raise WalkError(f"boundary loop needs at least 3 nodes, got {ring}")
            if len(set(ring)) != len(ring):
                raise WalkError(f"boundary loop repeats a node: {ring}")
            for i, u in enumerate(ring):
                v = ring[(i + 1) % len(ring)]
                if not index.has_edge(u, v):
                    raise WalkError(f"boundary is not a closed edge loop: {u}-{v} is not a mesh edge")


@dataclass(frozen=True)
class Panel:
    id: int
    elements: frozenset
    nodes: frozenset
    boundary: PanelBoundary


@dataclass
class WalkState:
    """Mutable record of a walk: checkpoint plus accepted elements and nodes.

    ``element_list`` entries are ``(element id, connectivity nodes)``.
    """

    checkpoint_node: Optional[int] = None
    checkpoint_element: Optional[int] = None
    element_list: list = field(default_factory=list)
    node_list: list = field(default_factory=list)
    restarts: int = 0
    _accepted: set = field(default_factory=set, repr=False)

    @property
    def element_ids(self) -> list:
        return [e for e, _ in self.element_list]

    def reset(self):
        self.checkpoint_node = None
        self.checkpoint_element = None
        self.element_list = []
        self.node_list = []
        self._accepted = set()

    def accept(self, index: AdjacencyIndex, eid: int):
        if eid not in self._accepted:
            self._accepted.add(eid)
            self.element_list.append((eid, index.elements[eid].nodes))


class _Blocked(Exception):
    def __init__(self, edge):
        self.edge = edge


class _WrongPath(Exception):
    pass


def _other_edge_at(nodes: tuple, v: int, incoming) -> tuple:
    i = nodes.index(v)
    before = edge_key(nodes[i - 1], v)
    after = edge_key(v, nodes[(i + 1) % len(nodes)])
    if incoming == before:
        return after
    if incoming == after:
        return before
    raise WalkError(f"edge {incoming} is not incident to node {v} in element with nodes {nodes}")


def _rotate(index: AdjacencyIndex, v: int, eid: int, incoming, walls) -> tuple:
    """Turn around ``v`` from ``eid`` (entered through ``incoming``) until a wall.

    Returns ``(visited, last_element, wall_edge)``. Raises :class:`_Blocked`
    when a free edge that is not a wall stops the rotation.
    """
    visited = [eid]
    cur, edge = eid, incoming
    for _ in range(len(index.node_to_elements[v]) + 1):
        out = _other_edge_at(index.elements[cur].nodes, v, edge)
        if out in walls:
            return visited, cur, out
        owners = index.edge_to_elements[out]
        if len(owners) == 1:
            raise _Blocked(out)
        if len(owners) > 2:
            raise WalkError(f"non-manifold edge {out} ({len(owners)} elements)")
        (cur,) = owners - {cur}
        edge = out
        visited.append(cur)
    raise WalkError(f"rotation around node {v} never reached a wall")


def _side_is_enclosed(index: AdjacencyIndex, seed: int, walls) -> bool:
    """True when the wall-limited region around ``seed`` touches no foreign free edge."""
    seen = {seed}
    queue = deque([seed])
    while queue:
        eid = queue.popleft()
        for edge in index.elements[eid].edges():
            if edge in walls:
                continue
            owners = index.edge_to_elements[edge]
            if len(owners) == 1:
                return False
            for nb in owners:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
    return True


def curve_side_elements(index: AdjacencyIndex, curve: DividingCurve, k: int = 2) -> set:
    """Elements with at least ``k`` nodes on the curve, from both of its sides."""
    if len(curve.nodes) < 2:
        raise TopologyError("a dividing curve needs at least 2 nodes")
    return elements_sharing_at_least(index, curve.nodes, k)


def _walk_loop_side(index, order, walls, first, state, loop_nodes):
    m = len(order)
    state.checkpoint_element = first
    state.checkpoint_node = order[1]
    state.accept(index, first)
    state.node_list = [order[0], order[1]]
    for i in range(1, m + 1):
        v = order[i % m]
        incoming = edge_key(order[i - 1], v)
        target = edge_key(v, order[(i + 1) % m])
        try:
            _, cur, out = _rotate(index, v, state.checkpoint_element, incoming, walls)
        except _Blocked as blocked:
            # the mesh border would push the checkpoint off the loop: wrong side
            far = blocked.edge[0] if blocked.edge[1] == v else blocked.edge[1]
            log.debug("wrong path at node %s (checkpoint would move to %s, on loop: %s)",
                      v, far, far in loop_nodes)
            state.checkpoint_node = far
            raise _WrongPath() from None
        if out != target:
            raise WalkError(f"boundary touches another wall at node {v}")
        state.checkpoint_element = cur
        if i == m:
            if cur != first:
                raise WalkError("walk came back to the start edge on the other side")
            break
        state.accept(index, cur)
        nxt = order[(i + 1) % m]
        state.checkpoint_node = nxt
        if i < m - 1:
            state.node_list.append(nxt)


def periphery_walk(index: AdjacencyIndex, boundary: PanelBoundary, start: int,
                   first_element: Optional[int] = None) -> WalkState:
    """Walk the loop from ``start`` collecting the panel-side elements on it.

    Of the (at most two) elements on the start edge, ``first_element`` (or
    the lower id) is tried first. If the walk turns out to be on the wrong
    side, the lists are cleared and the walk restarts from the other element.
    A side is wrong when the rotation around a checkpoint node hits the mesh
    border instead of the next loop edge, or, for a loop with no free edge,
    when the region on that side is not closed off by the boundary.
    """
    loop = boundary.loop
    if start not in loop:
        raise WalkError(f"start node {start} is not on the boundary loop")
    boundary.check(index)
    i0 = loop.index(start)
    order = loop[i0:] + loop[:i0]
    walls = boundary.wall_edges()
    loop_nodes = set(loop)

    owners = index.edge_to_elements[edge_key(order[0], order[1])]
    if len(owners) > 2:
        raise WalkError(f"non-manifold edge {edge_key(order[0], order[1])}")
    candidates = sorted(owners)
    if first_element is not None:
        if first_element not in owners:
            raise WalkError(f"element {first_element} is not on the start edge")
        candidates.remove(first_element)
        candidates.insert(0, first_element)
    touches_border = any(len(index.edge_to_elements[e]) == 1 for e in loop_edges(loop))

    state = WalkState()
    for attempt, first in enumerate(candidates):
        if attempt:
            state.reset()
            state.restarts += 1
        try:
            _walk_loop_side(index, order, walls, first, state, loop_nodes)
        except _WrongPath:
            continue
        if not touches_border and not _side_is_enclosed(index, first, walls):
            continue
        return state
    raise WalkError("no element on the start edge lies inside the boundary")


def mea_first_element(index: AdjacencyIndex, curve: DividingCurve, periphery: WalkState) -> int:
    """Pick the element on the curve's first segment that lies inside the panel.

    A candidate qualifies when it is already on the periphery or shares a
    non-curve edge with a periphery element. Ties go to the candidate sharing
    more nodes with the periphery elements, then to the lower id.
    """
    c0, c1 = curve.nodes[0], curve.nodes[1]
    if c0 not in periphery.node_list:
        raise WalkError(f"curve start node {c0} is not on the periphery")
    seg = edge_key(c0, c1)
    if seg not in index.edge_to_elements:
        raise WalkError(f"curve discontinuity: {c0}-{c1} is not a mesh edge")
    accepted = set(periphery.element_ids)
    accepted_nodes = {n for _, nodes in periphery.element_list for n in nodes}
    curve_edges = set(curve.edges())

    ok = []
    for cand in sorted(index.edge_to_elements[seg]):
        if cand in accepted:
            ok.append(cand)
            continue
        for edge in index.elements[cand].edges():
            if edge in curve_edges:
                continue
            if index.edge_to_elements[edge] & accepted:
                ok.append(cand)
                break
    if not ok:
        raise WalkError(f"no element on segment {seg} touches the periphery")
    return max(ok, key=lambda e: (len(accepted_nodes.intersection(index.elements[e].nodes)), -e))


def mid_element_walk(index: AdjacencyIndex, curve: DividingCurve, first: int) -> WalkState:
    """Collect, in curve order, the elements on ``first``'s side edging the curve."""
    curve.check(index)
    nodes = curve.nodes
    walls = set(curve.edges())
    if edge_key(nodes[0], nodes[1]) not in index.elements[first].edges():
        raise WalkError(f"element {first} does not lie on the first curve segment")
    state = WalkState(checkpoint_node=nodes[1], checkpoint_element=first,
                      node_list=[nodes[0], nodes[1]])
    state.accept(index, first)
    curve_nodes = set(nodes)
    for i in range(1, len(nodes) - 1):
        v = nodes[i]
        incoming = edge_key(nodes[i - 1], v)
        target = edge_key(v, nodes[i + 1])
        try:
            _, cur, out = _rotate(index, v, state.checkpoint_element, incoming, walls)
        except _Blocked as blocked:
            raise WalkError(f"mid-element walk hit the mesh border at edge {blocked.edge}") from None
        if out != target:
            raise WalkError(f"mid-element walk lost the curve at node {v}")
        shared = curve_nodes.intersection(index.elements[cur].nodes)
        if len(shared) < 2:
            raise WalkError(f"element {cur} crossed to the far side of the curve")
        state.accept(index, cur)
        state.checkpoint_element = cur
        state.checkpoint_node = nodes[i + 1]
        state.node_list.append(nodes[i + 1])
    return state


def flood_fill_panel(index: AdjacencyIndex, boundary_elements: Iterable[int], seed: int,
                     boundary: PanelBoundary, panel_id: int = 1) -> Panel:
    """Grow the panel from the boundary elements without crossing boundary edges."""
    walls = boundary.wall_edges()
    starts = set(boundary_elements)
    if seed not in index.elements:
        raise TopologyError(f"unknown seed element {seed}")
    if seed not in starts:
        reachable = any(
            edge not in walls and index.edge_to_elements[edge] & starts
            for edge in index.elements[seed].edges()
        )
        if not reachable:
            raise TopologyError(f"seed {seed} is not reachable from the boundary elements")
    starts.add(seed)
    seen = set(starts)
    queue = deque(sorted(starts))
    while queue:
        eid = queue.popleft()
        for edge in index.elements[eid].edges():
            if edge in walls:
                continue
            owners = index.edge_to_elements[edge]
            if len(owners) == 1:
                raise OpenBoundaryError(f"fill escaped through free edge {edge}: boundary is open")
            if len(owners) > 2:
                raise TopologyError(f"non-manifold edge {edge} ({len(owners)} elements)")
            for nb in owners:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
    nodes = frozenset(n for e in seen for n in index.elements[e].nodes)
    return Panel(panel_id, frozenset(seen), nodes, boundary)


def extract_panel(mesh: Optional[Mesh], index: AdjacencyIndex, boundary: PanelBoundary,
                  panel_id: int = 1) -> Panel:
    """Periphery walk followed by mesh-continuity fill."""
    walk = periphery_walk(index, boundary, boundary.loop[0])
    ids = walk.element_ids
    return flood_fill_panel(index, ids, ids[0], boundary, panel_id)


def oracle_side_fill(index: AdjacencyIndex, wall_edges, seed: int) -> set:
    """Breadth-first closure over shared edges, never crossing ``wall_edges``.

    Reference implementation used to cross-check the walk-based extraction.
    """
    walls = {edge_key(*e) for e in wall_edges}
    seen = {seed}
    queue = deque([seed])
    while queue:
        eid = queue.popleft()
        nodes = index.elements[eid].nodes
        for i in range(len(nodes)):
            edge = edge_key(nodes[i], nodes[(i + 1) % len(nodes)])
            if edge in walls:
                continue
            for nb in index.edge_to_elements[edge]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
    return seen


# --- decomposition -----------------------------------------------------------

def _component(index, seed, walls, assigned, tag):
    comp = {seed}
    assigned[seed] = tag
    queue = deque([seed])
    while queue:
        eid = queue.popleft()
        for edge in index.elements[eid].edges():
            if edge in walls:
                continue
            for nb in index.edge_to_elements[edge]:
                if nb not in assigned:
                    assigned[nb] = tag
                    comp.add(nb)
                    queue.append(nb)
    return comp


def _normalize_loop(cycle: Sequence[int]) -> tuple:
    i = cycle.index(min(cycle))
    ring = list(cycle[i:]) + list(cycle[:i])
    if len(ring) > 2 and ring[-1] < ring[1]:
        ring = [ring[0]] + ring[1:][::-1]
    return tuple(ring)


def _boundary_cycles(index: AdjacencyIndex, comp: set) -> list:
    sides = {}
    for eid in comp:
        for edge in index.elements[eid].edges():
            if len(index.edge_to_elements[edge] & comp) == 1:
                sides[edge] = eid
    walls = set(sides)
    cycles = []
    while sides:
        start = min(sides)
        elem = sides[start]
        u, v = start
        cycle = [u]
        prev, node = u, v
        while True:
            sides.pop(edge_key(prev, node), None)
            if node == u:
                break
            if node in cycle:
                raise PartitionError(f"panel boundary is not a simple loop (pinched at node {node})")
            cycle.append(node)
            _, elem, out = _rotate(index, node, elem, edge_key(prev, node), walls)
            prev, node = node, (out[0] if out[1] == node else out[1])
        cycles.append(_normalize_loop(cycle))
    return cycles


def decompose(mesh: Optional[Mesh], index: AdjacencyIndex, curves: Sequence) -> list:
    """Split the indexed skin into panels bounded by the curves and the border.

    Panels come back sorted by their node sets and numbered from 1, so the
    result does not depend on element numbering.
    """
    curves = [c if isinstance(c, DividingCurve) else DividingCurve(tuple(c)) for c in curves]
    bad = index.non_manifold_edges()
    if bad:
        raise TopologyError(f"non-manifold edge {min(bad)} in skin mesh")
    border = index.border_nodes()
    for i, curve in enumerate(curves):
        try:
            curve.check(index)
        except WalkError as exc:
            raise PartitionError(str(exc)) from None
        for end in (curve.nodes[0], curve.nodes[-1]):
            if end in border:
                continue
            if any(end in other.nodes for j, other in enumerate(curves) if j != i):
                continue
            raise PartitionError(f"curve endpoint not on boundary: node {end}")
    walls = set()
    for curve in curves:
        walls.update(curve.edges())

    assigned: dict = {}
    components = []
    for curve in curves:
        for first in sorted(index.edge_to_elements[curve.edges()[0]]):
            side = mid_element_walk(index, curve, first)
            for eid in side.element_ids:
                if eid not in assigned:
                    components.append(_component(index, eid, walls, assigned, len(components)))
    for eid in sorted(index.elements):
        if eid not in assigned:
            components.append(_component(index, eid, walls, assigned, len(components)))

    for edge in walls:
        owners = index.edge_to_elements[edge]
        if len(owners) == 2:
            a, b = owners
            if assigned[a] == assigned[b]:
                raise PartitionError(f"curve edge {edge} has the same panel on both sides")

    free = index.free_edges()

    def rank(c):
        return (any(e in free for e in loop_edges(c)), len(c), tuple(-n for n in c))

    drafts = []
    for comp in components:
        cycles = _boundary_cycles(index, comp)
        outer = max(cycles, key=rank)
        holes = tuple(sorted(c for c in cycles if c != outer))
        nodes = frozenset(n for e in comp for n in index.elements[e].nodes)
        drafts.append((tuple(sorted(nodes)), comp, PanelBoundary(outer, holes)))
    drafts.sort(key=lambda d: d[0])

    panels = []
    for pid, (_, comp, boundary) in enumerate(drafts, start=1):
        panel = extract_panel(mesh, index, boundary, pid)
        if panel.elements != comp:
            raise TopologyError(f"panel {pid}: walk-based extraction disagrees with the partition")
        panels.append(panel)
    log.info("decomposed %d elements into %d panels", len(index.elements), len(panels))
    return panels

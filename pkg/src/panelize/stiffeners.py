"""Attach blade-stiffener quad chains to extracted panels.

A stiffener quad belongs to a panel when at least two of its nodes are panel
nodes. Quads on a dividing curve qualify for both neighbouring panels; the
one sharing more nodes wins, then the lower panel id, and the tie is kept as
an ambiguity record. Chains are then built per panel, so a stiffener running
across a panel boundary is split into per-panel pieces.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import MalformedStiffenerError
from .mesh import AdjacencyIndex, ElementKind, Mesh, build_adjacency, elements_sharing_at_least

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StiffenerChain:
    elements: tuple
    attached_panel: Optional[int] = None
    closed: bool = False

    def __len__(self):
        return len(self.elements)


@dataclass
class Association:
    assignments: dict = field(default_factory=dict)   # panel id -> frozenset of quad ids
    unassigned: list = field(default_factory=list)
    ambiguous: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def panel_of(self, eid: int) -> Optional[int]:
        for pid, quads in self.assignments.items():
            if eid in quads:
                return pid
        return None


def associate_stiffeners(panels: Sequence, stiffener_mesh: Mesh, element_ids=None) -> Association:
    """Assign every stiffener quad to at most one panel by shared nodes.

    ``element_ids`` limits the search (e.g. the ``"stiffeners"`` tag); by
    default every element of ``stiffener_mesh`` is treated as a stiffener.
    """
    ids = sorted(stiffener_mesh.elements if element_ids is None else element_ids)
    skin_nodes = set()
    for p in panels:
        skin_nodes |= p.nodes
    out = Association(assignments={p.id: set() for p in panels})
    for eid in ids:
        quad = stiffener_mesh.elements[eid]
        if quad.kind is not ElementKind.QUAD:
            raise MalformedStiffenerError(f"stiffener element {eid} is a {quad.kind.name}, expected QUAD")
        nodes = set(quad.nodes)
        on_skin = len(nodes & skin_nodes)
        if on_skin != 2:
            msg = f"stiffener quad {eid} shares {on_skin} nodes with the skin (expected 2)"
            out.warnings.append(msg)
            log.warning(msg)
        shared = sorted(((len(nodes & p.nodes), p.id) for p in panels), key=lambda s: (-s[0], s[1]))
        candidates = [(n, pid) for n, pid in shared if n >= 2]
        if not candidates:
            out.unassigned.append(eid)
            continue
        chosen = candidates[0][1]
        out.assignments[chosen].add(eid)
        if len(candidates) > 1:
            out.ambiguous.append({
                "element": eid,
                "candidates": sorted(pid for _, pid in candidates),
                "shared": [n for _, n in sorted((pid, n) for n, pid in candidates)],
                "chosen": chosen,
            })
    out.assignments = {pid: frozenset(q) for pid, q in out.assignments.items()}
    return out


def _free_min(index, eid, neighbours) -> int:
    # smallest node of ``eid`` not shared with its chain neighbours
    own = set(index.elements[eid].nodes)
    for nb in neighbours:
        own -= set(index.elements[nb].nodes)
    return min(own) if own else min(index.elements[eid].nodes)


def build_chains(assigned: Iterable[int], index: AdjacencyIndex,
                 panel_id: Optional[int] = None) -> list:
    """Split quads into maximal node-connected chains, each ordered end to end.

    Open chains start at the end whose unshared nodes have the lower minimum
    id; rings start at the quad holding the lowest node.
    """
    quads = set(assigned)
    users: dict = {}
    for q in sorted(quads):
        if q in index.elements:
            for n in index.elements[q].nodes:
                users.setdefault(n, []).append(q)
    for n, qs in sorted(users.items()):
        if len(qs) >= 3:
            raise MalformedStiffenerError(f"branching stiffener: node {n} is shared by quads {qs}")
    nbrs = {}
    for q in quads:
        if q not in index.elements:
            raise MalformedStiffenerError(f"unknown stiffener element {q}")
        near = elements_sharing_at_least(index, index.elements[q].nodes, 1) & quads
        near.discard(q)
        if len(near) >= 3:
            raise MalformedStiffenerError(
                f"branching stiffener: quad {q} touches {len(near)} quads {sorted(near)}")
        nbrs[q] = near

    chains = []
    seen = set()
    for q in sorted(quads):
        if q in seen:
            continue
        comp, todo = {q}, [q]
        while todo:
            for nb in nbrs[todo.pop()]:
                if nb not in comp:
                    comp.add(nb)
                    todo.append(nb)
        seen |= comp
        ends = [e for e in comp if len(nbrs[e]) <= 1]
        closed = not ends
        if closed:
            start = min(comp, key=lambda e: (min(index.elements[e].nodes), e))
            # step first toward the neighbour holding the lower unshared node
            first = min(nbrs[start], key=lambda e: (_free_min(index, e, [start]), e))
        else:
            start = min(ends, key=lambda e: (_free_min(index, e, nbrs[e]), e))
            first = next(iter(nbrs[start]), None)
        order = [start]
        prev, cur = start, first
        while cur is not None and cur != start:
            order.append(cur)
            nxt = [e for e in nbrs[cur] if e != prev]
            prev, cur = cur, (nxt[0] if nxt else None)
        chains.append(StiffenerChain(tuple(order), panel_id, closed))
    chains.sort(key=lambda c: (_free_min(index, c.elements[0], nbrs[c.elements[0]]), c.elements))
    return chains


@dataclass
class StiffenerLayout:
    association: Association
    chains: list

    def chains_for(self, panel_id: int) -> list:
        return [c for c in self.chains if c.attached_panel == panel_id]

    def to_record(self) -> dict:
        a = self.association
        return {
            "assignments": {str(pid): sorted(q) for pid, q in sorted(a.assignments.items())},
            "chains": [{"panel": c.attached_panel, "elements": list(c.elements), "closed": c.closed}
                       for c in self.chains],
            "unassigned": sorted(a.unassigned),
            "ambiguous": list(a.ambiguous),
            "warnings": list(a.warnings),
        }


def stiffen(panels: Sequence, stiffener_mesh: Mesh, element_ids=None) -> StiffenerLayout:
    """Associate quads with panels and build the per-panel chains."""
    assoc = associate_stiffeners(panels, stiffener_mesh, element_ids)
    index = build_adjacency(stiffener_mesh, sorted(set().union(*assoc.assignments.values()))
                            if assoc.assignments else [])
    chains = []
    for pid in sorted(assoc.assignments):
        chains.extend(build_chains(assoc.assignments[pid], index, pid))
    return StiffenerLayout(assoc, chains)


def layout_from_record(rec: dict) -> StiffenerLayout:
    assoc = Association(
        assignments={int(k): frozenset(v) for k, v in rec["assignments"].items()},
        unassigned=list(rec.get("unassigned", [])),
        ambiguous=list(rec.get("ambiguous", [])),
        warnings=list(rec.get("warnings", [])),
    )
    chains = [StiffenerChain(tuple(c["elements"]), c["panel"], c.get("closed", False))
              for c in rec["chains"]]
    return StiffenerLayout(assoc, chains)

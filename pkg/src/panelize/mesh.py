"""Mesh container and connectivity index.

Everything the extraction code needs is a set operation on the two maps held
by :class:`AdjacencyIndex`; nodal coordinates are carried along for rendering
and geometry estimates but never read here.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

from .errors import MeshError

Edge = tuple  # sorted (low, high) node-id pair
Coord = Optional[tuple]


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class ElementKind(enum.Enum):
    TRI = 3
    QUAD = 4

    @property
    def n_nodes(self) -> int:
        return self.value


@dataclass(frozen=True)
class Element:
    id: int
    kind: ElementKind
    nodes: tuple

    def __post_init__(self):
        nodes = self.nodes
        if type(nodes) is not tuple or not all(type(n) is int for n in nodes):
            nodes = tuple(int(n) for n in nodes)
            object.__setattr__(self, "nodes", nodes)
        if isinstance(self.id, bool) or int(self.id) <= 0:
            raise MeshError(f"element id must be a positive integer, got {self.id!r}")
        if len(nodes) != self.kind.n_nodes:
            raise MeshError(
                f"element {self.id}: {self.kind.name} needs {self.kind.n_nodes} nodes, got {len(nodes)}"
            )
        if len(set(nodes)) != len(nodes):
            raise MeshError(f"element {self.id}: repeated node in {nodes}")
        if min(nodes) <= 0:
            raise MeshError(f"element {self.id}: node ids must be positive")
        edges = tuple((u, v) if u < v else (v, u) for u, v in zip(nodes, nodes[1:] + nodes[:1]))
        object.__setattr__(self, "_edges", edges)

    def edges(self) -> tuple:
        """Element edges as sorted node pairs, in cyclic node order."""
        return self._edges

    @classmethod
    def tri(cls, eid, *nodes):
        return cls(eid, ElementKind.TRI, tuple(nodes))

    @classmethod
    def quad(cls, eid, *nodes):
        return cls(eid, ElementKind.QUAD, tuple(nodes))


@dataclass(frozen=True)
class Mesh:
    """Immutable node/element container.

    ``nodes`` maps node id to an ``(x, y, z)`` tuple or ``None`` when the
    coordinate is unknown. ``tags`` holds named element groups.
    """

    nodes: Mapping[int, Coord]
    elements: Mapping[int, Element]
    tags: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        nodes = {}
        for nid, xyz in self.nodes.items():
            if isinstance(nid, bool) or int(nid) <= 0:
                raise MeshError(f"node id must be a positive integer, got {nid!r}")
            nodes[int(nid)] = None if xyz is None else tuple(float(c) for c in xyz)
        elements = dict(self.elements)
        for eid, elem in elements.items():
            if eid != elem.id:
                raise MeshError(f"element keyed as {eid} carries id {elem.id}")
            missing = [n for n in elem.nodes if n not in nodes]
            if missing:
                raise MeshError(f"element {eid} references missing node(s) {missing}")
        tags = {}
        for name, ids in self.tags.items():
            ids = frozenset(ids)
            unknown = ids - elements.keys()
            if unknown:
                raise MeshError(f"tag {name!r} lists unknown elements {sorted(unknown)[:5]}")
            tags[name] = ids
        object.__setattr__(self, "nodes", MappingProxyType(nodes))
        object.__setattr__(self, "elements", MappingProxyType(elements))
        object.__setattr__(self, "tags", MappingProxyType(tags))

    @classmethod
    def from_elements(cls, nodes, elements: Iterable[Element], tags=None) -> "Mesh":
        """Build a mesh from an element sequence, rejecting duplicate ids.

        ``nodes`` may be a mapping id -> coordinate or a plain iterable of ids
        (coordinates absent).
        """
        if not isinstance(nodes, Mapping):
            nodes = {n: None for n in nodes}
        table = {}
        for elem in elements:
            if elem.id in table:
                raise MeshError(f"duplicate element id {elem.id}")
            table[elem.id] = elem
        return cls(nodes, table, tags or {})

    @property
    def has_coordinates(self) -> bool:
        return bool(self.nodes) and all(xyz is not None for xyz in self.nodes.values())

    def subset(self, element_ids: Iterable[int]) -> "Mesh":
        """Mesh restricted to ``element_ids`` and the nodes they use."""
        ids = set(element_ids)
        elems = {e: self.elements[e] for e in sorted(ids)}
        used = {n for e in elems.values() for n in e.nodes}
        tags = {k: v & ids for k, v in self.tags.items()}
        return Mesh({n: self.nodes[n] for n in sorted(used)}, elems, tags)

    def without_coordinates(self) -> "Mesh":
        return Mesh({n: None for n in self.nodes}, self.elements, self.tags)

    def with_coordinates(self, coords: Mapping[int, Coord]) -> "Mesh":
        return Mesh({n: coords.get(n) for n in self.nodes}, self.elements, self.tags)

    def relabel_elements(self, mapping: Mapping[int, int]) -> "Mesh":
        """Return a copy with element ids renamed through ``mapping``."""
        elems = [Element(mapping[e.id], e.kind, e.nodes) for e in self.elements.values()]
        tags = {k: {mapping[e] for e in v} for k, v in self.tags.items()}
        return Mesh.from_elements(self.nodes, elems, tags)


@dataclass(frozen=True)
class AdjacencyIndex:
    """Node->elements and edge->elements incidence maps of a mesh."""

    elements: Mapping[int, Element]
    node_to_elements: Mapping[int, frozenset]
    edge_to_elements: Mapping[Edge, frozenset]

    def element_nodes(self, eid: int) -> tuple:
        return self.elements[eid].nodes

    def free_edges(self) -> set:
        return {e for e, owners in self.edge_to_elements.items() if len(owners) == 1}

    def non_manifold_edges(self) -> set:
        return {e for e, owners in self.edge_to_elements.items() if len(owners) > 2}

    def border_nodes(self) -> set:
        """Nodes lying on at least one free edge."""
        return {n for e in self.free_edges() for n in e}

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edge_to_elements


def build_adjacency(mesh: Mesh, element_ids: Optional[Iterable[int]] = None) -> AdjacencyIndex:
    """Materialize the connectivity maps of ``mesh``.

    ``element_ids`` restricts the index to a subset (e.g. the ``"skin"`` tag).
    """
    if element_ids is None:
        selected = mesh.elements
    else:
        selected = {}
        for eid in element_ids:
            if eid in selected:
                raise MeshError(f"duplicate element id {eid}")
            if eid not in mesh.elements:
                raise MeshError(f"unknown element id {eid}")
            selected[eid] = mesh.elements[eid]

    n2e: dict = {}
    e2e: dict = {}
    for eid, elem in selected.items():
        for n in elem.nodes:
            if n not in mesh.nodes:
                raise MeshError(f"element {eid} references missing node {n}")
            n2e.setdefault(n, set()).add(eid)
        for edge in elem.edges():
            e2e.setdefault(edge, set()).add(eid)
    return AdjacencyIndex(
        elements=MappingProxyType(dict(selected)),
        node_to_elements=MappingProxyType({n: frozenset(s) for n, s in n2e.items()}),
        edge_to_elements=MappingProxyType({e: frozenset(s) for e, s in e2e.items()}),
    )


def elements_sharing_at_least(index: AdjacencyIndex, nodes: Iterable[int], k: int) -> set:
    """Elements with at least ``k`` of their nodes in ``nodes``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    counts: dict = {}
    for n in set(nodes):
        for eid in index.node_to_elements.get(n, ()):
            counts[eid] = counts.get(eid, 0) + 1
    return {eid for eid, c in counts.items() if c >= k}


def edge_neighbors(index: AdjacencyIndex, eid: int) -> set:
    """Elements other than ``eid`` sharing a full edge with it."""
    try:
        elem = index.elements[eid]
    except KeyError:
        raise MeshError(f"unknown element id {eid}") from None
    out = set()
    for edge in elem.edges():
        out.update(index.edge_to_elements[edge])
    out.discard(eid)
    return out


def loop_edges(loop: Sequence[int]) -> set:
    """Cyclic consecutive pairs of a node loop as sorted edges."""
    m = len(loop)
    if m == 2:
        return {edge_key(loop[0], loop[1])}
    return {edge_key(loop[i], loop[(i + 1) % m]) for i in range(m)}


def path_edges(path: Sequence[int]) -> list:
    """Consecutive pairs of an open node path as sorted edges."""
    return [edge_key(path[i], path[i + 1]) for i in range(len(path) - 1)]

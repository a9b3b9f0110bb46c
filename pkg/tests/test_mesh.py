import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panelize.errors import MeshError
from panelize.fixtures import reference_mesh, structured_mesh
from panelize.mesh import (Element, ElementKind, Mesh, build_adjacency, edge_neighbors,
                           elements_sharing_at_least)


def brute_force_edges(mesh):
    """Every unordered node pair that appears consecutively in some element."""
    edges = {}
    for e in mesh.elements.values():
        k = len(e.nodes)
        for i, j in itertools.combinations(range(k), 2):
            if (j - i) % k in (1, k - 1):
                edges.setdefault(frozenset((e.nodes[i], e.nodes[j])), set()).add(e.id)
    return edges


def test_single_tri():
    mesh = Mesh.from_elements([1, 2, 3], [Element.tri(1, 1, 2, 3)])
    idx = build_adjacency(mesh)
    assert dict(idx.node_to_elements) == {1: {1}, 2: {1}, 3: {1}}
    assert dict(idx.edge_to_elements) == {(1, 2): {1}, (2, 3): {1}, (1, 3): {1}}


def test_two_tris_share_edge():
    mesh = Mesh.from_elements([1, 2, 3, 4], [Element.tri(1, 1, 2, 3), Element.tri(2, 2, 4, 3)])
    idx = build_adjacency(mesh)
    assert idx.edge_to_elements[(2, 3)] == {1, 2}
    assert edge_neighbors(idx, 1) == {2}
    assert edge_neighbors(idx, 2) == {1}


def test_reference_mesh_layout(ref_mesh):
    assert len(ref_mesh.nodes) == 15
    assert len(ref_mesh.elements) == 16
    assert ref_mesh.elements[1].nodes == (1, 2, 7)
    assert ref_mesh.elements[2].nodes == (1, 7, 6)
    assert ref_mesh.elements[16].nodes == (9, 15, 14)


def test_reference_mesh_edges_by_enumeration(ref_mesh, ref_index):
    brute = brute_force_edges(ref_mesh)
    # brute force finds 30 edges (15 nodes + 16 faces - 1 by Euler's formula)
    assert len(brute) == 30
    assert len(ref_index.edge_to_elements) == len(brute)
    for edge, owners in brute.items():
        assert ref_index.edge_to_elements[tuple(sorted(edge))] == owners
    counts = sorted(len(v) for v in brute.values())
    assert counts.count(1) == 12 and counts.count(2) == 18
    assert ref_index.free_edges() == {tuple(sorted(e)) for e, v in brute.items() if len(v) == 1}


def test_sharing_queries(ref_index):
    assert elements_sharing_at_least(ref_index, set(), 2) == set()
    assert elements_sharing_at_least(ref_index, {6, 7, 8, 9, 10}, 2) == {2, 4, 6, 8, 9, 11, 13, 15}
    assert elements_sharing_at_least(ref_index, {1, 2, 3, 4, 5}, 2) == {1, 3, 5, 7}
    with pytest.raises(ValueError):
        elements_sharing_at_least(ref_index, {1}, 0)


def test_sharing_matches_enumeration(ref_mesh, ref_index):
    rng = random.Random(3)
    for _ in range(50):
        nodes = set(rng.sample(range(1, 16), rng.randint(0, 8)))
        k = rng.randint(1, 3)
        expect = {e.id for e in ref_mesh.elements.values() if len(nodes & set(e.nodes)) >= k}
        assert elements_sharing_at_least(ref_index, nodes, k) == expect


def test_edge_neighbors_corner(ref_index):
    # element 1 = (1, 2, 7): {1,2} is free, {1,7} is shared with 2, {2,7} with 4
    assert edge_neighbors(ref_index, 1) == {2, 4}
    with pytest.raises(MeshError):
        edge_neighbors(ref_index, 99)
    lone = build_adjacency(Mesh.from_elements([1, 2, 3], [Element.tri(5, 1, 2, 3)]))
    assert edge_neighbors(lone, 5) == set()


def test_rejects_bad_input():
    with pytest.raises(MeshError, match="duplicate"):
        Mesh.from_elements([1, 2, 3], [Element.tri(1, 1, 2, 3), Element.tri(1, 1, 3, 2)])
    with pytest.raises(MeshError, match="missing"):
        Mesh.from_elements([1, 2], [Element.tri(1, 1, 2, 3)])
    with pytest.raises(MeshError, match="repeated"):
        Element.tri(1, 1, 2, 2)
    with pytest.raises(MeshError):
        Element(1, ElementKind.QUAD, (1, 2, 3))
    with pytest.raises(MeshError):
        Element.tri(0, 1, 2, 3)


def test_non_manifold_accepted_at_build():
    mesh = Mesh.from_elements(range(1, 6), [Element.tri(1, 1, 2, 3), Element.tri(2, 1, 2, 4),
                                            Element.tri(3, 1, 2, 5)])
    idx = build_adjacency(mesh)
    assert idx.non_manifold_edges() == {(1, 2)}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.randoms(use_true_random=False))
def test_insertion_order_and_edge_counting(rows, cols, rnd):
    mesh = structured_mesh(rows, cols)
    elems = list(mesh.elements.values())
    rnd.shuffle(elems)
    shuffled = Mesh.from_elements(dict(mesh.nodes), elems)
    a, b = build_adjacency(mesh), build_adjacency(shuffled)
    assert dict(a.node_to_elements) == dict(b.node_to_elements)
    assert dict(a.edge_to_elements) == dict(b.edge_to_elements)
    for e in mesh.elements.values():
        for n in e.nodes:
            assert e.id in a.node_to_elements[n]
    assert sum(len(e.nodes) for e in elems) == sum(len(v) for v in a.edge_to_elements.values())
    assert all(len(v) in (1, 2) for v in a.edge_to_elements.values())


def test_coordinate_blindness():
    mesh = reference_mesh()
    scrambled = mesh.with_coordinates({n: (random.random(), -7.0, 1e9) for n in mesh.nodes})
    for m in (scrambled, mesh.without_coordinates()):
        a, b = build_adjacency(mesh), build_adjacency(m)
        assert dict(a.edge_to_elements) == dict(b.edge_to_elements)
        assert elements_sharing_at_least(a, {6, 7, 8}, 2) == elements_sharing_at_least(b, {6, 7, 8}, 2)

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MID_ROW
from panelize.errors import MalformedStiffenerError
from panelize.extract import decompose
from panelize.fixtures import quad_strip, reference_mesh, reference_stiffeners
from panelize.mesh import Element, Mesh, build_adjacency
from panelize.stiffeners import associate_stiffeners, build_chains, stiffen


@pytest.fixture
def halves(ref_mesh, ref_index):
    lower, upper = decompose(ref_mesh, ref_index, [MID_ROW])
    assert lower.nodes == frozenset(range(1, 11))
    return lower, upper


def strip_mesh(*paths, first=1):
    nodes, elems = {}, []
    for k, path in enumerate(paths):
        n, e = quad_strip(first + 10 * k, path, 500 + 20 * k)
        nodes.update(n)
        elems.extend(e)
    return Mesh.from_elements(nodes, elems)


def test_unique_candidate(halves):
    a = associate_stiffeners(halves, strip_mesh((2, 3)))
    assert a.assignments == {1: {1}, 2: set()}
    assert a.ambiguous == [] and a.unassigned == [] and a.warnings == []


def test_curve_quad_tie(halves):
    a = associate_stiffeners(halves, strip_mesh((7, 8)))
    assert a.assignments[1] == {1} and a.assignments[2] == set()
    assert a.ambiguous == [{"element": 1, "candidates": [1, 2], "shared": [2, 2], "chosen": 1}]


def test_more_shared_nodes_wins(halves):
    # a quad lying flat on skin nodes 7, 8, 13, 12 shares 2 with the lower panel, 4 with the upper
    mesh = Mesh.from_elements(range(1, 16), [Element.quad(9, 7, 8, 13, 12)])
    a = associate_stiffeners(halves, mesh)
    assert a.assignments[2] == {9}
    assert a.ambiguous[0]["chosen"] == 2 and a.ambiguous[0]["shared"] == [2, 4]
    assert "shares 4 nodes" in a.warnings[0]


def test_single_shared_node_unassigned(halves):
    mesh = Mesh.from_elements([1, 90, 91, 92], [Element.quad(4, 1, 90, 91, 92)])
    a = associate_stiffeners(halves, mesh)
    assert a.unassigned == [4]
    assert all(not q for q in a.assignments.values())
    assert "shares 1 nodes" in a.warnings[0]


def test_non_quad_rejected(halves):
    mesh = Mesh.from_elements([1, 2, 90], [Element.tri(4, 1, 2, 90)])
    with pytest.raises(MalformedStiffenerError, match="expected QUAD"):
        associate_stiffeners(halves, mesh)


def test_reference_fixture(halves):
    layout = stiffen(halves, reference_stiffeners())
    a = layout.association
    assert a.assignments == {1: {101, 102, 301, 302}, 2: {201, 202, 203, 303}}
    assert a.ambiguous == [{"element": 302, "candidates": [1, 2], "shared": [2, 2], "chosen": 1}]
    assert [(c.attached_panel, c.elements) for c in layout.chains] == [
        (1, (101, 102)), (1, (301, 302)), (2, (303,)), (2, (201, 202, 203))]
    assert layout.to_record()["assignments"] == {"1": [101, 102, 301, 302],
                                                 "2": [201, 202, 203, 303]}


def test_chain_examples():
    mesh = strip_mesh((1, 2, 3, 4), (10, 11), (20, 21))
    idx = build_adjacency(mesh)
    chains = build_chains(mesh.elements, idx)
    assert [c.elements for c in chains] == [(1, 2, 3), (11,), (21,)]


def test_five_quad_ordering():
    # zig-zag through the middle of R's lower panel: 1, 7, 2, 8, 3, 9
    path = (1, 7, 2, 8, 3, 9)
    fwd = strip_mesh(path)
    rev = strip_mesh(tuple(reversed(path)))
    for mesh in (fwd, rev):
        (chain,) = build_chains(mesh.elements, build_adjacency(mesh), panel_id=1)
        skin_pairs = [tuple(sorted(mesh.elements[e].nodes[:2])) for e in chain.elements]
        assert skin_pairs == [(1, 7), (2, 7), (2, 8), (3, 8), (3, 9)]
        assert chain.attached_panel == 1 and not chain.closed


def test_branching_chain_rejected():
    mesh = strip_mesh((1, 2, 3, 4), (3, 8))
    with pytest.raises(MalformedStiffenerError, match="branching"):
        build_chains(mesh.elements, build_adjacency(mesh))
    # three quads meeting at one skin node, each with only two neighbours
    mesh = strip_mesh((1, 2, 3), (2, 7))
    with pytest.raises(MalformedStiffenerError, match="node 2 is shared"):
        build_chains(mesh.elements, build_adjacency(mesh))


def test_ring_chain():
    quads = [Element.quad(5, 1, 2, 12, 11), Element.quad(6, 2, 3, 13, 12),
             Element.quad(7, 3, 4, 14, 13), Element.quad(8, 4, 1, 11, 14)]
    mesh = Mesh.from_elements(range(1, 15), quads)
    (chain,) = build_chains(mesh.elements, build_adjacency(mesh))
    assert chain.closed and chain.elements == (5, 6, 7, 8)


def test_empty_inputs(halves):
    layout = stiffen(halves, Mesh({}, {}))
    assert layout.chains == [] and layout.association.assignments == {1: set(), 2: set()}
    assert build_chains([], build_adjacency(Mesh({}, {}))) == []


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False), st.booleans())
def test_relabel_and_coordinates(rnd, drop):
    skin_halves = decompose(None, build_adjacency(reference_mesh()), [MID_ROW])
    stiff = reference_stiffeners()
    base = stiffen(skin_halves, stiff)
    ids = sorted(stiff.elements)
    new = rnd.sample(range(1, 10_000), len(ids))
    pi = dict(zip(ids, new))
    moved = stiff.relabel_elements(pi)
    if drop:
        moved = moved.without_coordinates()
    else:
        moved = moved.with_coordinates({n: (rnd.random(), rnd.random(), 9.0) for n in moved.nodes})
    got = stiffen(skin_halves, moved)
    assert got.association.assignments == {p: {pi[q] for q in s}
                                           for p, s in base.association.assignments.items()}
    assert [{**r, "element": pi[r["element"]]} for r in base.association.ambiguous] == \
        got.association.ambiguous
    assert sorted((c.attached_panel, tuple(pi[e] for e in c.elements)) for c in base.chains) == \
        sorted((c.attached_panel, c.elements) for c in got.chains)


def test_assignment_completeness_random(ref_mesh, ref_index):
    panels = decompose(ref_mesh, ref_index, [MID_ROW, (3, 8, 13)])
    rng = random.Random(11)
    edges = sorted(ref_index.edge_to_elements)
    for trial in range(30):
        picks = rng.sample(edges, 5)
        quads = [Element.quad(i + 1, u, v, 100 + 2 * i, 101 + 2 * i) for i, (u, v) in enumerate(picks)]
        mesh = Mesh.from_elements(list(range(1, 16)) + list(range(100, 110)), quads)
        a = associate_stiffeners(panels, mesh)
        for q in quads:
            hits = [pid for pid, s in a.assignments.items() if q.id in s]
            qualifies = any(len(set(q.nodes) & p.nodes) >= 2 for p in panels)
            assert len(hits) == (1 if qualifies else 0)

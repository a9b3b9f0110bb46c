import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panelize.bdf import (BulkDeck, format_real, load_mesh, mesh_from_dict, mesh_to_dict,
                          parse_bdf, save_mesh, write_bdf)
from panelize.errors import BdfParseError
from panelize.fixtures import random_structured_mesh
from panelize.mesh import Element, ElementKind, Mesh

GOOD_GRID = "GRID           1             0.0     0.0     0.0"


def card_counts(text):
    counts = {}
    for line in text.splitlines():
        if line and not line.startswith("$"):
            key = line[:8].strip()
            counts[key] = counts.get(key, 0) + 1
    return counts


def same_deck(a: BulkDeck, b: BulkDeck):
    assert dict(a.mesh.nodes) == dict(b.mesh.nodes)
    assert dict(a.mesh.elements) == dict(b.mesh.elements)
    ids = sorted(a.mesh.elements)
    assert [a.property_ids.get(e, 1) for e in ids] == [b.property_ids.get(e, 1) for e in ids]


def test_small_field_grid():
    deck = parse_bdf(GOOD_GRID + "\n")
    assert dict(deck.mesh.nodes) == {1: (0.0, 0.0, 0.0)}


def test_free_field_ctria3():
    deck = parse_bdf("GRID,1,,0.,0.,0.\nGRID,2,,1.,0.,0.\nGRID,7,,1.,1.,0.\nCTRIA3,1,1,1,2,7\n")
    elem = deck.mesh.elements[1]
    assert elem.kind is ElementKind.TRI and elem.nodes == (1, 2, 7)
    assert deck.property_ids[1] == 1


def test_keyword_case_and_comments():
    text = "$ header\ngrid,1,,0.,0.,0.\nGrId,2,,1.,0.,0.\ngrid,3,,1.,1.,0.\nctria3,4,2,1,2,3\nENDDATA\nGRID,9,,x\n"
    deck = parse_bdf(text)
    assert sorted(deck.mesh.nodes) == [1, 2, 3]
    assert deck.property_ids == {4: 2}
    assert deck.source_lines == {4: 5}


def test_cquad4_and_exponents():
    text = ("GRID,1,,1.5E-3,0.,0.\nGRID,2,,2.e1,0.,0.\nGRID,3,,-.5,1,0.\nGRID,4,,0.,1.,0.\n"
            "CQUAD4,10,3,1,2,3,4\n")
    deck = parse_bdf(text)
    assert deck.mesh.nodes[1] == (1.5e-3, 0.0, 0.0)
    assert deck.mesh.nodes[2][0] == 20.0
    assert deck.mesh.nodes[3][:2] == (-0.5, 1.0)
    assert deck.mesh.elements[10].kind is ElementKind.QUAD


def test_unsupported_cards_warn():
    text = ("PSHELL,1,1,0.002\nMAT1,1,71.E9,,0.33\n" + GOOD_GRID + "\n"
            "+       continued\n")
    deck = parse_bdf(text)
    assert len(deck.warnings) == 3
    assert "PSHELL" in deck.warnings[0] and "line 1" in deck.warnings[0]
    assert "MAT1" in deck.warnings[1]
    assert "continuation" in deck.warnings[2]


def test_trailing_whitespace_and_blank_fields():
    deck = parse_bdf("GRID           5                    2.0                   \n")
    assert deck.mesh.nodes[5] == (0.0, 2.0, 0.0)
    assert parse_bdf("GRID           5                \n").mesh.nodes[5] is None
    deck = parse_bdf("GRID,1\nGRID,2\nGRID,3\nCTRIA3,8,,1,2,3,\n")
    assert deck.property_ids[8] == 8  # blank PID falls back to the element id


def test_reference_deck_counts_and_roundtrip(ref_mesh):
    text = write_bdf(ref_mesh)
    assert card_counts(text) == {"GRID": 15, "CTRIA3": 16, "ENDDATA": 1}
    back = parse_bdf(text)
    same_deck(BulkDeck(ref_mesh), back)
    assert write_bdf(back) == text


def test_selection_single_element(ref_mesh):
    text = write_bdf(ref_mesh, {1})
    lines = [ln for ln in text.splitlines() if ln.startswith(("GRID", "CTRIA3"))]
    assert [int(ln[8:16]) for ln in lines] == [1, 2, 7, 1]
    assert card_counts(text) == {"GRID": 3, "CTRIA3": 1, "ENDDATA": 1}


def test_small_field_columns(ref_mesh):
    text = write_bdf(ref_mesh, {16})
    tri = [ln for ln in text.splitlines() if ln.startswith("CTRIA3")][0]
    assert tri == "CTRIA3        16       1       9      15      14"
    grid = [ln for ln in text.splitlines() if ln.startswith("GRID")][0]
    assert grid[:16] == "GRID           9" and grid[16:24].strip() == ""
    assert all(len(ln) <= 80 for ln in text.splitlines())


def test_empty_selection_rejected(ref_mesh):
    with pytest.raises(ValueError, match="must contain elements"):
        write_bdf(ref_mesh, set())
    with pytest.raises(ValueError):
        write_bdf(ref_mesh, {99})


def test_write_without_coordinates(ref_mesh):
    text = write_bdf(ref_mesh.without_coordinates())
    back = parse_bdf(text)
    assert all(xyz is None for xyz in back.mesh.nodes.values())
    assert write_bdf(back) == text
    assert dict(back.mesh.elements) == dict(ref_mesh.elements)


@pytest.mark.parametrize("x", [0.0, 1.0, -1.0, 0.1, 1 / 3, 71e9, 345e6, -2.5e-7, 123456789.0,
                               1e-9, 9.999999e20, 0.5, 1e7, -12345.678])
def test_format_real_fits_and_is_close(x):
    s = format_real(x)
    assert len(s) <= 8 and "." in s
    assert float(s) == pytest.approx(x, rel=1e-3, abs=1e-12)
    assert format_real(float(s)) == s


# (text, line number, message fragment)
MALFORMED = [
    ("GRID,1,,0.,0.,0.\nGRID,x,,0.,0.,0.\n", 2, "malformed integer"),
    ("GRID,1,,0.,abc,0.\n", 1, "malformed real"),
    ("GRID,1,,1.0+3,0.,0.\n", 1, "short exponent"),
    ("GRID,1,,1.0D3,0.,0.\n", 1, "E exponents"),
    ("$c\nGRID,1,,0.,0.,0.\nGRID,1,,1.,0.,0.\n", 3, "duplicate GRID id 1"),
    ("GRID,1\nGRID,2\nGRID,3\nCTRIA3,1,1,1,2,3\nCTRIA3,1,1,3,2,1\n", 5, "duplicate element id 1"),
    ("GRID,1\nGRID,2\nCTRIA3,4,1,1,2,9\nGRID,3\n", 3, "undefined GRID 9"),
    ("GRID,1\nGRID,2\nGRID,3\n\nCTRIA3,4,1,1,2\n", 5, "missing required field G3"),
    ("GRID,1\nGRID,2\nGRID,3\nCTRIA3,4,1,1,2,2\n", 4, "repeated node"),
    ("GRID,-4,,0.,0.,0.\n", 1, "positive id"),
]


@pytest.mark.parametrize("text,line,fragment", MALFORMED)
def test_malformed_corpus(text, line, fragment):
    with pytest.raises(BdfParseError) as info:
        parse_bdf(text)
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"line {line}: ")


def test_malformed_corpus_size():
    assert len(MALFORMED) == 10


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.floats(0, 1), st.integers(0, 2**32 - 1),
       st.booleans())
def test_roundtrip_random_meshes(rows, cols, flip, seed, coords):
    mesh = random_structured_mesh(np.random.default_rng(seed), rows, cols, flip_fraction=flip)
    if not coords:
        mesh = mesh.without_coordinates()
    pids = {e: 1 + (e % 5) for e in mesh.elements}
    deck = BulkDeck(mesh, pids)
    text = write_bdf(deck)
    back = parse_bdf(text)
    assert sorted(back.mesh.nodes) == sorted(mesh.nodes)
    assert dict(back.mesh.elements) == dict(mesh.elements)
    assert back.property_ids == pids
    assert write_bdf(back) == text


def test_quad_roundtrip():
    mesh = Mesh.from_elements({1: (0, 0, 0), 2: (1, 0, 0), 3: (1, 1, 0), 4: (0, 1, 0)},
                              [Element.quad(7, 1, 2, 3, 4)])
    text = write_bdf(mesh)
    assert "CQUAD4         7       1       1       2       3       4" in text
    same_deck(BulkDeck(mesh), parse_bdf(text))


def test_json_mesh_roundtrip(tmp_path, ref_mesh):
    doc = mesh_to_dict(ref_mesh, {1: 4})
    back = mesh_from_dict(json.loads(json.dumps(doc)))
    assert back.mesh == ref_mesh and back.property_ids == {1: 4}
    save_mesh(ref_mesh, tmp_path / "r.json")
    save_mesh(ref_mesh, tmp_path / "r.bdf")
    assert load_mesh(tmp_path / "r.json").mesh == ref_mesh
    assert dict(load_mesh(tmp_path / "r.bdf").mesh.elements) == dict(ref_mesh.elements)
    with pytest.raises(BdfParseError, match="format_version"):
        mesh_from_dict({"format_version": 2})
    (tmp_path / "bad.json").write_text("{\n oops")
    with pytest.raises(BdfParseError):
        load_mesh(tmp_path / "bad.json")

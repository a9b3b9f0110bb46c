import json

import pytest
import yaml

from panelize.config import build_specs, config_from_dict, geometry_from_panel, load_config
from panelize.errors import ConfigError, OptimizationError
from panelize.extract import decompose
from panelize.fixtures import reference_mesh, structured_mesh, toy_wingbox, toy_wingbox_config
from panelize.globalloop import ConstantLoads, StiffnessRedistribution
from panelize.mesh import build_adjacency
from panelize.sizing import ALUMINUM, PanelLoads

from conftest import MID_ROW


def ref_panels():
    m = reference_mesh()
    return m, decompose(m, build_adjacency(m), [MID_ROW])


def test_defaults():
    cfg = config_from_dict({})
    assert cfg.material == ALUMINUM
    assert isinstance(cfg.make_provider(), ConstantLoads)
    lc = cfg.loop_config(seed=4, workers=3)
    assert (lc.seed, lc.worker_count, lc.max_iterations) == (4, 3, 10)


def test_toy_config_matches_fixture():
    specs, provider, loop = toy_wingbox()
    cfg = config_from_dict(toy_wingbox_config())
    _, panels = ref_panels()
    assert build_specs(panels, cfg) == specs
    assert cfg.make_provider() == provider
    assert cfg.loop_config() == loop


def test_yaml_and_json_agree(tmp_path):
    doc = toy_wingbox_config()
    (tmp_path / "c.yaml").write_text(yaml.safe_dump(doc))
    (tmp_path / "c.json").write_text(json.dumps(doc))
    a, b = load_config(tmp_path / "c.yaml"), load_config(tmp_path / "c.json")
    assert a == b


def test_yaml_exponent_without_dot(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("provider: {type: constant, loads: {nx: -5e5}}\n")
    assert load_config(p).make_provider().default == PanelLoads(nx=-5e5)


@pytest.mark.parametrize("doc,fragment", [
    ({"materials": {}}, "unknown config key"),
    ({"material": {"E": 1.0}}, "bad material"),
    ({"material": {"E": -1.0, "nu": 0.3, "rho": 1.0, "sigma_y": 1.0}}, "bad material"),
    ({"bounds": {"t": [0.02, 0.01], "t_stiff": [1, 2], "h_stiff": [1, 2]}}, "bad bounds"),
    ({"provider": {"type": "nastran"}}, "unknown provider"),
    ({"loop": {"max_iterations": 0}}, "bad loop"),
    ({"loop": {"seed": 3}}, "unknown loop key"),
    ({"panels": {1: {"colour": "red"}}}, "overrides"),
    ({"provider": {"type": "constant", "loads": {"mx": 1.0}}}, "unknown loads key"),
])
def test_bad_configs(doc, fragment):
    with pytest.raises(ConfigError, match=fragment):
        config_from_dict(doc)


def test_bad_yaml_has_line(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("material:\n  E: [1\n")
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.line is not None


def test_geometry_from_coordinates():
    m, panels = ref_panels()
    g = geometry_from_panel(m, panels[0], n_stiff=2)
    assert (g.a, g.b, g.area, g.n_stiff, g.stiff_length) == (4.0, 1.0, 4.0, 2, 4.0)


def test_geometry_of_tilted_panel():
    # the same 2x3 grid rotated about x: b and area keep their lengths
    flat = structured_mesh(2, 3)
    c, s = 0.6, 0.8
    tilted = flat.with_coordinates({n: (x, c * y, s * y) for n, (x, y, _) in flat.nodes.items()})
    ix = build_adjacency(tilted)
    (panel,) = decompose(tilted, ix, [])
    g = geometry_from_panel(tilted, panel)
    assert g.a == pytest.approx(3.0) and g.b == pytest.approx(2.0) and g.area == pytest.approx(6.0)


def test_specs_need_geometry_source():
    m, panels = ref_panels()
    cfg = config_from_dict({})
    with pytest.raises(OptimizationError):
        build_specs(panels, cfg, m.without_coordinates())
    specs = build_specs(panels, cfg, m, {1: 2})
    assert [s.geom.n_stiff for s in specs] == [2, 0]
    with pytest.raises(ConfigError, match="unknown panel"):
        build_specs(panels, config_from_dict({"panels": {7: {}}}), m)


def test_redistribution_provider():
    cfg = config_from_dict({"provider": {"type": "redistribution", "total_force": 1e5, "shear_flow": 10}})
    assert cfg.make_provider() == StiffnessRedistribution(1e5, 10.0)

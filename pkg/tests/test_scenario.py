import pytest

from circbody.errors import ConfigError, ScenarioError
from circbody.geometry import ShapeSpec
from circbody.scenario import load_scenario, parse_scenario_text, resolve_path

FOIL_TEXT = """\
# rounded Joukowski foil
[body]
shape = joukowski
circle_radius = 1.15
center = -0.1, 0.05
c = 1.0
panels = 128

[dynamics]
gamma = -1.5
dt = 0.002
steps = 500
integrator = rk4
initial_momentum = 0.0, 1.0, 0.2
"""

BASIC = """\
[body]
shape = circle
radius = 1.0

[dynamics]
gamma = 2.0
dt = 0.001
steps = 1000
initial_momentum = 0.0, 1.0, 0.0
"""


def test_parse_basic():
    s = parse_scenario_text(BASIC)
    assert s.body.shape_spec() == ShapeSpec.circle(1.0)
    assert s.body.panels == 256
    assert s.dynamics.gamma == 2.0
    assert s.dynamics.steps == 1000
    assert s.dynamics.initial_momentum == (0.0, 1.0, 0.0)
    assert s.dynamics.integrator == "implicit_midpoint"
    assert s.outputs.trajectory == "trajectory.dat"


def test_parse_lists_and_comments():
    text = BASIC.replace("steps = 1000", "steps = 1000   # one second\n; a full-line comment") + (
        "\n[outputs]\nfield_times = 0.0, 0.5 ,1.0\nfield_x = -2, 2, 5\n"
    )
    s = parse_scenario_text(text)
    assert s.outputs.field_times == (0.0, 0.5, 1.0)
    assert s.outputs.field_x == (-2.0, 2.0, 5)


def test_missing_key_names_section_and_key():
    text = BASIC.replace("gamma = 2.0\n", "")
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text)
    assert "[dynamics] missing key 'gamma'" in str(info.value)
    # points at the section header
    assert info.value.line == 5


def test_missing_section():
    with pytest.raises(ScenarioError, match=r"missing section \[dynamics\]"):
        parse_scenario_text("[body]\nshape = circle\nradius = 1.0\n")


def test_unknown_key_reports_its_line():
    text = BASIC.replace("dt = 0.001", "dt = 0.001\ndtt = 0.002")
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text)
    assert "unknown key 'dtt'" in str(info.value)
    assert info.value.line == 8
    assert str(info.value).startswith("line 8: ")


def test_unknown_section():
    with pytest.raises(ScenarioError, match="unknown section") as info:
        parse_scenario_text(BASIC + "\n[solver]\ntol = 1e-9\n")
    assert info.value.line == 11


@pytest.mark.parametrize("text, needle", [
    ("[body]\nshape = circle\nradius = 1.0\nradius = 2.0\n", "duplicate key"),
    ("shape = circle\n", "outside of any section"),
    ("[body\n", "malformed section header"),
    ("[body]\nshape circle\n", "expected 'key = value'"),
])
def test_malformed_lines(text, needle):
    with pytest.raises(ScenarioError, match=needle):
        parse_scenario_text(text)


def test_shape_keys_are_checked():
    with pytest.raises(ScenarioError, match="does not apply to shape circle"):
        parse_scenario_text(BASIC.replace("radius = 1.0", "radius = 1.0\na = 2.0"))
    with pytest.raises(ScenarioError, match="needs key 'b'"):
        parse_scenario_text(BASIC.replace("shape = circle\nradius = 1.0", "shape = ellipse\na = 2.0"))


@pytest.mark.parametrize("old, new", [
    ("dt = 0.001", "dt = 0"),
    ("steps = 1000", "steps = -5"),
    ("steps = 1000", "steps = many"),
    ("initial_momentum = 0.0, 1.0, 0.0", "initial_momentum = 0.0, 1.0"),
    ("gamma = 2.0", "gamma = 2.0\nintegrator = euler"),
    ("gamma = 2.0", "gamma = 2.0\npose_order = 3"),
    ("radius = 1.0", "radius = 1.0\npanels = 4"),
])
def test_invalid_values(old, new):
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(BASIC.replace(old, new))
    assert info.value.line > 0
    assert isinstance(info.value, ConfigError)


def test_text_round_trip():
    s = parse_scenario_text(FOIL_TEXT)
    assert s.body.center == (-0.1, 0.05)
    again = parse_scenario_text(s.to_text())
    assert again == s
    assert again.to_text() == s.to_text()


def test_load_scenario(scenario_file, tmp_path):
    path = scenario_file(BASIC)
    assert load_scenario(path).dynamics.dt == 0.001
    with pytest.raises(ScenarioError, match="cannot read scenario"):
        load_scenario(tmp_path / "missing.ini")


def test_resolve_path(tmp_path):
    scenario = tmp_path / "runs" / "a.ini"
    assert resolve_path(scenario, "mass.txt") == (tmp_path / "runs").resolve() / "mass.txt"
    assert resolve_path(scenario, str(tmp_path / "abs.txt")) == tmp_path / "abs.txt"
    assert str(resolve_path(None, "mass.txt")) == "mass.txt"

"""
Scenario files: flat sectioned `key = value` text.

    [body]
    shape = circle
    radius = 1.0

    [dynamics]
    gamma = 2.0
    dt = 0.001
    steps = 1000
    initial_momentum = 0.0, 1.0, 0.0

Sections [body] and [dynamics] are required, [outputs] is optional. Lists are comma separated.
Comments start with '#' or ';'.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ScenarioError
from .geometry import ShapeSpec
from .settings import DEFAULT_DENSITY, DEFAULT_PANELS, MIN_PANELS

SECTIONS = ("body", "dynamics", "outputs")


def _split_list(v: Any) -> Any:
    if isinstance(v, str):
        parts = [p.strip() for p in v.split(",")]
        return [p for p in parts if p != ""]
    return v


Vec2 = Annotated[Tuple[float, float], BeforeValidator(_split_list)]
Vec3 = Annotated[Tuple[float, float, float], BeforeValidator(_split_list)]
FloatList = Annotated[Tuple[float, ...], BeforeValidator(_split_list)]
Grid = Annotated[Tuple[float, float, int], BeforeValidator(_split_list)]

_SHAPE_KEYS = {
    "circle": ("radius",),
    "ellipse": ("a", "b"),
    "joukowski": ("circle_radius", "center", "c"),
}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BodySection(_Section):
    shape: Literal["circle", "ellipse", "joukowski"]
    panels: int = Field(default=DEFAULT_PANELS, ge=MIN_PANELS)
    density: float = Field(default=DEFAULT_DENSITY, gt=0.0)
    radius: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    circle_radius: Optional[float] = None
    center: Optional[Vec2] = None
    c: Optional[float] = None
    # precomputed mass file (io.write_mass_model format), relative to the scenario file
    mass_file: Optional[str] = None

    @model_validator(mode="after")
    def _shape_keys(self) -> "BodySection":
        needed = _SHAPE_KEYS[self.shape]
        for key in needed:
            if getattr(self, key) is None:
                raise ValueError(f"shape {self.shape} needs key '{key}'")
        for other in {k for keys in _SHAPE_KEYS.values() for k in keys} - set(needed):
            if getattr(self, other) is not None:
                raise ValueError(f"key '{other}' does not apply to shape {self.shape}")
        return self

    def shape_spec(self) -> ShapeSpec:
        if self.shape == "circle":
            return ShapeSpec.circle(self.radius)
        if self.shape == "ellipse":
            return ShapeSpec.ellipse(self.a, self.b)
        return ShapeSpec.joukowski(self.circle_radius, self.center, self.c)


class DynamicsSection(_Section):
    gamma: float
    dt: float = Field(gt=0.0)
    steps: int = Field(ge=0)
    integrator: Literal["rk4", "implicit_midpoint"] = "implicit_midpoint"
    space: Literal["se2_magnetic", "osc"] = "se2_magnetic"
    initial_momentum: Vec3
    initial_pose: Vec3 = (0.0, 0.0, 0.0)
    initial_p: Optional[float] = None
    pose_order: int = 2

    @field_validator("pose_order")
    @classmethod
    def _pose_order(cls, v: int) -> int:
        if v not in (2, 4):
            raise ValueError("must be 2 or 4")
        return v


class OutputsSection(_Section):
    trajectory: str = "trajectory.dat"
    summary: str = "summary.txt"
    leaves: str = "leaves.dat"
    field: str = "field.dat"
    nodes: str = "nodes.dat"
    mass: str = "mass.txt"
    field_x: Grid = (-3.0, 3.0, 41)
    field_y: Grid = (-3.0, 3.0, 41)
    field_times: FloatList = (0.0,)
    leaf_levels: FloatList = (-2.0, -1.0, 0.0, 1.0, 2.0)
    leaf_px_max: float = Field(default=3.0, gt=0.0)
    leaf_samples: int = Field(default=101, ge=2)


class ScenarioFile(_Section):
    body: BodySection
    dynamics: DynamicsSection
    outputs: OutputsSection = OutputsSection()

    def to_text(self) -> str:
        lines: List[str] = []
        for name in SECTIONS:
            section: BaseModel = getattr(self, name)
            lines.append(f"[{name}]")
            for key, value in section.model_dump(exclude_none=True).items():
                lines.append(f"{key} = {_format_value(value)}")
            lines.append("")
        return "\n".join(lines)


def _format_value(value: Any) -> str:
    if isinstance(value, (tuple, list)):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------- parsing ----------


def _read_lines(text: str) -> Tuple[Dict[str, Dict[str, str]], Dict[Tuple[str, str], int]]:
    raw: Dict[str, Dict[str, str]] = {}
    lines: Dict[Tuple[str, str], int] = {}
    section: Optional[str] = None

    for no, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s or s.startswith(";"):
            continue
        if s.startswith("["):
            if not s.endswith("]"):
                raise ScenarioError(f"malformed section header {s!r}", no)
            section = s[1:-1].strip()
            if section not in SECTIONS:
                raise ScenarioError(f"unknown section [{section}] (expected {', '.join(SECTIONS)})", no)
            if section in raw:
                raise ScenarioError(f"duplicate section [{section}]", no)
            raw[section] = {}
            lines[(section, "")] = no
            continue
        if section is None:
            raise ScenarioError("key outside of any section", no)
        if "=" not in s:
            raise ScenarioError(f"expected 'key = value', got {s!r}", no)
        key, value = (p.strip() for p in s.split("=", 1))
        if not key:
            raise ScenarioError("empty key", no)
        if key in raw[section]:
            raise ScenarioError(f"[{section}] duplicate key '{key}'", no)
        raw[section][key] = value
        lines[(section, key)] = no
    return raw, lines


def _describe(err: Dict[str, Any], lines: Dict[Tuple[str, str], int]) -> Tuple[str, int]:
    loc = [str(p) for p in err.get("loc", ())]
    kind = err.get("type", "")
    section = loc[0] if loc else ""
    key = loc[1] if len(loc) > 1 else ""

    if len(loc) > 2:
        msg = str(err.get("msg", "invalid value")).removeprefix("Value error, ")
        return f"[{section}] {key}: {msg} (item {loc[2]})", lines.get((section, key), 0)
    if kind == "missing" and not key:
        return f"missing section [{section}]", 0
    if kind == "missing":
        return f"[{section}] missing key '{key}'", lines.get((section, ""), 0)
    if kind == "extra_forbidden":
        return f"[{section}] unknown key '{key}'", lines.get((section, key), 0)
    msg = str(err.get("msg", "invalid value")).removeprefix("Value error, ")
    if key:
        return f"[{section}] {key}: {msg}", lines.get((section, key), 0)
    return f"[{section}] {msg}", lines.get((section, ""), 0)


def parse_scenario_text(text: str) -> ScenarioFile:
    raw, lines = _read_lines(text)
    try:
        return ScenarioFile.model_validate(raw)
    except ValidationError as exc:
        described = [_describe(e, lines) for e in exc.errors()]
        message = "; ".join(m for m, _ in described)
        line = next((ln for _, ln in described if ln), 0)
        raise ScenarioError(message, line) from None


def load_scenario(path: Union[str, Path]) -> ScenarioFile:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {p}: {exc.strerror or exc}") from exc
    return parse_scenario_text(text)


def resolve_path(scenario_path: Optional[Path], name: str) -> Path:
    p = Path(name)
    if p.is_absolute() or scenario_path is None:
        return p
    return Path(scenario_path).resolve().parent / p

"""
Plain-text output formats. Every number is written with 17 significant digits and files are
replaced atomically, so repeated runs give byte-identical files.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from .errors import GeometryError, MassModelError
from .geometry import BodyBoundary, nodes_text
from .potential import MassModel, make_mass_model
from .settings import SIGNIFICANT_DIGITS

PathLike = Union[str, Path]

TRAJECTORY_COLUMNS = ("t", "Pi", "Px", "Py", "theta", "x0", "y0", "H", "Casimir", "Fx_KZ", "Fy_KZ")


def fmt(x: float) -> str:
    return f"{float(x):.{SIGNIFICANT_DIGITS}g}"


def atomic_write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile("w", delete=False, encoding="utf-8", dir=str(path.parent),
                                     newline="\n") as tf:
        tf.write(text)
        tmp_name = tf.name
    os.replace(tmp_name, path)
    return path


def table_text(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    lines = [" ".join(header)]
    for row in rows:
        lines.append(" ".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_table(path: PathLike, header: Sequence[str], rows) -> Path:
    return atomic_write_text(path, table_text(header, rows))


# ---------- body ----------


def export_nodes(body: BodyBoundary, path: PathLike) -> Path:
    return atomic_write_text(path, nodes_text(body, SIGNIFICANT_DIGITS))


def read_body_nodes(path: PathLike) -> np.ndarray:
    rows: List[List[float]] = []
    for no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise GeometryError(f"{path}: line {no}: expected 'x y', got {s!r}")
        try:
            rows.append([float(parts[0]), float(parts[1])])
        except ValueError as exc:
            raise GeometryError(f"{path}: line {no}: {exc}") from exc
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


# ---------- mass model ----------


def _block(name: str, m: np.ndarray) -> List[str]:
    return [f"[{name}]"] + [" ".join(fmt(v) for v in row) for row in m]


def mass_model_text(mass: MassModel) -> str:
    lines = ["# mass model: 3x3 blocks, rows/cols (Omega, x, y)"]
    for name, m in (("M_b", mass.M_b), ("M_f", mass.M_f), ("M", mass.M)):
        lines.extend(_block(name, m))
    lines.append("[values]")
    values = {
        "density": mass.density,
        "m": mass.M_b[1, 1],
        "I": mass.M_b[0, 0],
        "M_f_asymmetry": mass.asymmetry,
    }
    lines.extend(f"{k} = {fmt(v)}" for k, v in values.items())
    return "\n".join(lines) + "\n"


def write_mass_model(mass: MassModel, path: PathLike) -> Path:
    return atomic_write_text(path, mass_model_text(mass))


def read_mass_model(path: PathLike) -> MassModel:
    blocks: Dict[str, List[List[float]]] = {}
    values: Dict[str, float] = {}
    current = None
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MassModelError(f"cannot read mass file {path}: {exc.strerror or exc}") from exc

    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1]
            blocks.setdefault(current, [])
            continue
        try:
            if current == "values":
                key, value = (p.strip() for p in s.split("=", 1))
                values[key] = float(value)
            elif current is not None:
                blocks[current].append([float(v) for v in s.split()])
            else:
                raise ValueError("data before the first block")
        except ValueError as exc:
            raise MassModelError(f"{path}: line {no}: {exc}") from exc

    try:
        mb = np.array(blocks["M_b"], dtype=np.float64)
        mf = np.array(blocks["M_f"], dtype=np.float64)
    except KeyError as exc:
        raise MassModelError(f"{path}: missing block [{exc.args[0]}]") from exc
    if mb.shape != (3, 3) or mf.shape != (3, 3):
        raise MassModelError(f"{path}: blocks must be 3x3")

    model = make_mass_model(mb, mf, values.get("density", 1.0), values.get("M_f_asymmetry", 0.0))
    if "M" in blocks:
        stored = np.array(blocks["M"], dtype=np.float64)
        if stored.shape != (3, 3) or not np.allclose(stored, model.M, rtol=1e-12, atol=1e-14):
            raise MassModelError(f"{path}: block [M] is not M_b + M_f")
    return model

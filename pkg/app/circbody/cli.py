"""
circbody command line.

    circbody simulate   --config data/scenarios/isotropic_circulation.ini --out out/
    circbody leaves     --config ... [--mode paper]
    circbody field      --config ...
    circbody added-mass --config ...
    circbody verify     [--seed N]

Exit codes: 0 ok, 1 usage, 2 validation failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence

import numpy as np

from . import algebra
from .algebra import Se2Element
from .dynamics import SimConfig, Trajectory, integrate
from .errors import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, CircbodyError, ConfigError, SingularCirculationError
from .geometry import BodyBoundary, make_body, point_in_body
from .io import TRAJECTORY_COLUMNS, atomic_write_text, export_nodes, fmt, mass_model_text, read_mass_model, \
    write_mass_model, write_table
from .potential import MassModel, added_mass, circulatory_flow, kirchhoff_potentials, velocity_field
from .scenario import ScenarioFile, load_scenario, resolve_path
from .settings import DEFAULT_SEED, get_out_dir
from .verify import run_verify

log = logging.getLogger("circbody.cli")

LOG_FORMAT = "[%(name)s] %(levelname)s: %(message)s"


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextmanager
def _stage(name: str) -> Iterator[None]:
    """Tag errors raised inside with the pipeline stage they came from."""
    try:
        yield
    except CircbodyError as exc:
        if not getattr(exc, "stage", None):
            exc.stage = name  # type: ignore[attr-defined]
        raise


# ---------- pipeline ----------


@dataclass
class Pipeline:
    scenario: ScenarioFile
    path: Optional[Path]
    mode: str = "verified"
    _body: Optional[BodyBoundary] = None
    _mass: Optional[MassModel] = None

    @classmethod
    def load(cls, path, mode: str = "verified") -> "Pipeline":
        p = Path(path)
        with _stage("config"):
            scenario = load_scenario(p)
        return cls(scenario=scenario, path=p, mode=mode)

    @property
    def body(self) -> BodyBoundary:
        if self._body is None:
            section = self.scenario.body
            with _stage("body"):
                self._body = make_body(section.shape_spec(), section.panels)
            log.info("body %s with %d panels, area %.6g", section.shape, self._body.n_panels, self._body.area)
        return self._body

    @property
    def mass(self) -> MassModel:
        if self._mass is None:
            section = self.scenario.body
            if section.mass_file:
                source = resolve_path(self.path, section.mass_file)
                with _stage("body"):
                    self._mass = read_mass_model(source)
                log.info("mass model read from %s", source)
            else:
                with _stage("potential"):
                    self._mass = added_mass(self.body, section.density)
        return self._mass

    def sim_config(self) -> SimConfig:
        d = self.scenario.dynamics
        with _stage("dynamics"):
            return SimConfig(
                mass=self.mass,
                gamma=d.gamma,
                dt=d.dt,
                steps=d.steps,
                integrator=d.integrator,
                initial_momentum=tuple(d.initial_momentum),
                initial_pose=Se2Element(*d.initial_pose),
                space=d.space,
                initial_p=d.initial_p,
                mode=self.mode,
                pose_order=d.pose_order,
            )

    def trajectory(self) -> Trajectory:
        cfg = self.sim_config()
        with _stage("dynamics"):
            return integrate(cfg)


def _output(out_dir: Path, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else out_dir / p


def trajectory_rows(traj: Trajectory) -> np.ndarray:
    return np.column_stack([
        traj.times, traj.momenta, traj.poses, traj.hamiltonian, traj.casimir, traj.force,
    ])


def summary_text(pipe: Pipeline, traj: Trajectory) -> str:
    d = pipe.scenario.dynamics
    lines = [mass_model_text(pipe.mass).rstrip("\n"), "[run]"]
    values = [
        ("gamma", d.gamma),
        ("dt", d.dt),
        ("steps", d.steps),
        ("H_initial", traj.hamiltonian[0]),
        ("H_final", traj.hamiltonian[-1]),
        ("H_max_relative_drift", traj.max_relative_drift("hamiltonian")),
        ("Casimir_initial", traj.casimir[0]),
        ("Casimir_final", traj.casimir[-1]),
        ("Casimir_max_relative_drift", traj.max_relative_drift("casimir")),
    ]
    lines.append(f"integrator = {d.integrator}")
    lines.append(f"space = {d.space}")
    lines.append(f"mode = {pipe.mode}")
    lines.extend(f"{k} = {fmt(v)}" for k, v in values)
    lines.extend(f"stats.{k} = {fmt(v)}" for k, v in sorted(traj.stats.items()))
    return "\n".join(lines) + "\n"


# ---------- runners ----------


def run_simulate(config, out_dir, mode: str = "verified") -> List[Path]:
    pipe = Pipeline.load(config, mode)
    traj = pipe.trajectory()
    outputs = pipe.scenario.outputs
    out_dir = Path(out_dir)

    written = [
        write_table(_output(out_dir, outputs.trajectory), TRAJECTORY_COLUMNS, trajectory_rows(traj)),
        atomic_write_text(_output(out_dir, outputs.summary), summary_text(pipe, traj)),
    ]
    log.info("H drift %.3e, Casimir drift %.3e",
             traj.max_relative_drift("hamiltonian"), traj.max_relative_drift("casimir"))
    return written


def leaf_traces(levels: Sequence[float], gamma: float, px_max: float, samples: int) -> np.ndarray:
    """Rows (level, Px, Pi_paper, Pi_verified) of the leaf paraboloids cut at Py = 0."""
    if gamma == 0.0:
        raise SingularCirculationError("symplectic leaves need gamma != 0 (cylinders at zero circulation)")
    px = np.linspace(-px_max, px_max, samples)
    c_paper = algebra.constants("paper").casimir_c
    c_verified = algebra.constants("verified").casimir_c
    rows = []
    for level in levels:
        rows.append(np.column_stack([
            np.full_like(px, level), px,
            level - c_paper * px * px / gamma,
            level - c_verified * px * px / gamma,
        ]))
    return np.vstack(rows)


def run_leaves(config, out_dir, mode: str = "verified") -> List[Path]:
    pipe = Pipeline.load(config, mode)
    outputs = pipe.scenario.outputs
    gamma = pipe.sim_config().effective_gamma
    with _stage("leaves"):
        traces = leaf_traces(outputs.leaf_levels, gamma, outputs.leaf_px_max, outputs.leaf_samples)
    traj = pipe.trajectory()

    c = algebra.constants("verified").casimir_c
    m = traj.momenta
    overlay = np.column_stack([traj.times, m, m[:, 0] + c * (m[:, 1] ** 2 + m[:, 2] ** 2) / gamma])

    target = _output(Path(out_dir), outputs.leaves)
    samples = target.with_name(target.stem + "_samples" + target.suffix)
    return [
        write_table(target, ("level", "Px", "Pi_paper", "Pi_verified"), traces),
        write_table(samples, ("t", "Pi", "Px", "Py", "Casimir_verified"), overlay),
    ]


def field_rows(pipe: Pipeline, traj: Trajectory) -> np.ndarray:
    outputs = pipe.scenario.outputs
    body = pipe.body
    xs = np.linspace(outputs.field_x[0], outputs.field_x[1], int(outputs.field_x[2]))
    ys = np.linspace(outputs.field_y[0], outputs.field_y[1], int(outputs.field_y[2]))
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    inside = point_in_body(body, points)
    outside = points[~inside]

    gamma = pipe.sim_config().effective_gamma
    with _stage("potential"):
        potentials = kirchhoff_potentials(body)
        flow = circulatory_flow(body, gamma)

    dt = pipe.scenario.dynamics.dt
    blocks = []
    for t in outputs.field_times:
        k = int(round(t / dt))
        if not (0 <= k < traj.n_samples) or abs(k * dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigError(f"field time {t} is not a sample time of the trajectory (dt={dt}, steps={traj.n_samples - 1})")
        zeta = pipe.mass.M_inv @ traj.momenta[k]
        u = np.zeros_like(points)
        with _stage("potential"):
            u[~inside] = velocity_field(body, zeta, gamma, outside, potentials=potentials, flow=flow)
        speed = np.hypot(u[:, 0], u[:, 1])
        blocks.append(np.column_stack([
            np.full(points.shape[0], traj.times[k]), points, u, speed, inside.astype(np.float64),
        ]))
    return np.vstack(blocks)


def run_field(config, out_dir, mode: str = "verified") -> List[Path]:
    pipe = Pipeline.load(config, mode)
    traj = pipe.trajectory()
    with _stage("field"):
        rows = field_rows(pipe, traj)
    target = _output(Path(out_dir), pipe.scenario.outputs.field)
    return [write_table(target, ("t", "x", "y", "ux", "uy", "speed", "inside"), rows)]


def run_added_mass(config, out_dir, mode: str = "verified") -> List[Path]:
    pipe = Pipeline.load(config, mode)
    outputs = pipe.scenario.outputs
    out_dir = Path(out_dir)
    written = [
        write_mass_model(pipe.mass, _output(out_dir, outputs.mass)),
        export_nodes(pipe.body, _output(out_dir, outputs.nodes)),
    ]
    sys.stdout.write(mass_model_text(pipe.mass))
    return written


# ---------- entry point ----------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="", help="Output directory.\nDefault: $CIRCBODY_OUT_DIR or data/out.")
    common.add_argument("--mode", choices=algebra.MODES, default="verified",
                        help="Normalization of the Casimir coefficient and cocycle scale.")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = _ArgumentParser(prog="circbody", description="Planar rigid body with circulation.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    for name, help_text in (
        ("simulate", "integrate a scenario and write the trajectory and a summary"),
        ("leaves", "write symplectic-leaf traces and the trajectory samples on them"),
        ("field", "write velocity-field snapshots on a grid"),
        ("added-mass", "write the mass model and the body node list"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--config", required=True, help="Scenario file.")

    p = sub.add_parser("verify", parents=[common], help="run the verification suite")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--samples", type=int, default=100, help="Random points per check.")
    return ap


RUNNERS = {
    "simulate": run_simulate,
    "leaves": run_leaves,
    "field": run_field,
    "added-mass": run_added_mass,
}


def _verify(args: argparse.Namespace, out_dir: Optional[Path]) -> int:
    report = run_verify(seed=args.seed, n=max(1, args.samples))
    text = report.text()
    sys.stdout.write(text)
    if out_dir is not None:
        atomic_write_text(out_dir / "verify_report.txt", text)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    out_arg = str(args.out).strip()

    try:
        if args.command == "verify":
            return _verify(args, Path(out_arg) if out_arg else None)
        out_dir = Path(out_arg) if out_arg else get_out_dir()
        for path in RUNNERS[args.command](args.config, out_dir, args.mode):
            print(path)
    except CircbodyError as exc:
        stage = getattr(exc, "stage", None) or args.command
        print(f"ERROR: [{stage}] {exc}", file=sys.stderr)
        return exc.exit_code
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

"""
Equations of motion of the planar body with circulation and their oscillator lift.

With zeta = (Omega, V) = M^-1 pi:
  dPi/dt = Px Vy - Py Vx
  dPx/dt = Omega Py - Gamma Vy
  dPy/dt = -Omega Px + Gamma Vx
In osc space the state carries p as a fourth component and Gamma is replaced by p (dp/dt = 0).
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import algebra
from .algebra import OscMomentum, Se2Element, Se2Momentum
from .errors import ConfigError, ConvergenceError, MassModelError
from .geometry import FloatArray
from .potential import MassModel
from .settings import MIDPOINT_MAX_ITER, MIDPOINT_TOL

log = logging.getLogger("circbody.dynamics")

INTEGRATORS = ("rk4", "implicit_midpoint")
DYNAMIC_SPACES = ("se2_magnetic", "osc")

_SQRT3 = np.sqrt(3.0)
_GAUSS_NODES = (0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0)


# ---------- right-hand sides ----------


def _rhs(m: FloatArray, m_inv: FloatArray, gamma: float) -> FloatArray:
    om, vx, vy = m_inv @ m
    return np.array([
        m[1] * vy - m[2] * vx,
        om * m[2] - gamma * vy,
        -om * m[1] + gamma * vx,
    ])


def _rhs_osc(nu: FloatArray, m_inv: FloatArray) -> FloatArray:
    # p takes the place of Gamma in every normalization mode
    out = np.zeros(4)
    out[:3] = _rhs(nu[:3], m_inv, nu[3])
    return out


def eom_rhs(momentum, mass: MassModel, gamma: float) -> FloatArray:
    return _rhs(np.asarray(momentum, dtype=np.float64).reshape(3), mass.M_inv, float(gamma))


def eom_rhs_osc(nu: Union[OscMomentum, Sequence[float]], mass: MassModel) -> FloatArray:
    """Rate of (Pi, Px, Py, p); accepts an OscMomentum or a 4-vector."""
    return _rhs_osc(np.asarray(nu, dtype=np.float64).reshape(4), mass.M_inv)


def body_velocity(momentum, mass: MassModel) -> FloatArray:
    return mass.M_inv @ np.asarray(momentum, dtype=np.float64).reshape(3)


def hamiltonian(momentum, mass: MassModel) -> float:
    m = np.asarray(momentum, dtype=np.float64).reshape(3)
    return 0.5 * float(m @ mass.M_inv @ m)


def hamiltonian_osc(nu: Union[OscMomentum, Sequence[float], FloatArray],
                    mass: MassModel) -> Union[float, FloatArray]:
    """H + p^2 / 2 for one state or for rows of states."""
    v = np.asarray(nu, dtype=np.float64)
    m, p = v[..., :3], v[..., 3]
    out = 0.5 * np.einsum("...i,ij,...j->...", m, mass.M_inv, m) + 0.5 * p * p
    return float(out) if out.ndim == 0 else out


def kutta_zhukowski_force(momentum, mass: MassModel, gamma: float) -> FloatArray:
    """Gamma b3 x V = Gamma (-Vy, Vx)."""
    _, vx, vy = body_velocity(momentum, mass)
    return np.array([-gamma * vy, gamma * vx])


def spatial_momentum(pose: Se2Element, momentum) -> Se2Momentum:
    """Ad*_{g^-1} pi. Conserved at zero circulation."""
    return algebra.coad_action(pose, momentum)


# ---------- configuration ----------


@dataclass(frozen=True)
class SimConfig:
    mass: MassModel
    gamma: float
    dt: float
    steps: int
    integrator: str = "implicit_midpoint"
    initial_momentum: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    initial_pose: Se2Element = field(default_factory=Se2Element)
    space: str = "se2_magnetic"
    # osc space only; defaults to gamma
    initial_p: Optional[float] = None
    # normalization mode: Casimir coefficient of the Casimir column
    mode: str = "verified"
    pose_order: int = 2

    def __post_init__(self) -> None:
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ConfigError(f"steps must be a non-negative integer, got {self.steps}")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"unknown integrator {self.integrator!r} (expected one of {', '.join(INTEGRATORS)})")
        if self.space not in DYNAMIC_SPACES:
            raise ConfigError(f"unknown space {self.space!r} (expected one of {', '.join(DYNAMIC_SPACES)})")
        if self.mode not in algebra.MODES:
            raise ConfigError(f"unknown mode {self.mode!r} (expected paper or verified)")
        if self.pose_order not in (2, 4):
            raise ConfigError(f"pose_order must be 2 or 4, got {self.pose_order}")
        if len(self.initial_momentum) != 3:
            raise ConfigError("initial_momentum needs three components (Pi, Px, Py)")

    @property
    def p(self) -> float:
        return float(self.gamma if self.initial_p is None else self.initial_p)

    @property
    def effective_gamma(self) -> float:
        """Circulation acting on the body: p in osc space, gamma otherwise."""
        return self.p if self.space == "osc" else float(self.gamma)

    def initial_state(self) -> FloatArray:
        m = np.asarray(self.initial_momentum, dtype=np.float64)
        if self.space == "osc":
            return np.asarray(OscMomentum(Se2Momentum.from_array(m), self.p), dtype=np.float64)
        return m.copy()


@dataclass(frozen=True)
class Trajectory:
    times: FloatArray
    momenta: FloatArray
    poses: FloatArray
    hamiltonian: FloatArray
    casimir: FloatArray
    spatial_momentum: FloatArray
    force: FloatArray
    gamma: float
    space: str
    p: Optional[float] = None
    stats: Dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def n_samples(self) -> int:
        return int(self.times.shape[0])

    def momentum(self, k: int) -> Se2Momentum:
        return Se2Momentum.from_array(self.momenta[k])

    def osc_momentum(self, k: int) -> OscMomentum:
        if self.p is None:
            raise ConfigError(f"trajectory in {self.space} space carries no oscillator momentum")
        return OscMomentum(self.momentum(k), self.p)

    def pose(self, k: int) -> Se2Element:
        return Se2Element(*(float(v) for v in self.poses[k]))

    def max_relative_drift(self, column: str) -> float:
        values = getattr(self, column)
        ref = abs(float(values[0]))
        return float(np.max(np.abs(values - values[0]))) / (ref if ref > 0.0 else 1.0)


# ---------- integrators ----------


class Integrator:
    """Fixed-step integrator for one trajectory. `stats` is updated as steps are taken."""

    def __init__(self, config: SimConfig) -> None:
        self.config = config
        self._m_inv = config.mass.M_inv
        if config.space == "osc":
            self._f: Callable[[FloatArray], FloatArray] = lambda y: _rhs_osc(y, self._m_inv)
        else:
            gam = float(config.gamma)
            self._f = lambda y: _rhs(y, self._m_inv, gam)

        self.stats = {
            "steps": 0,
            "rhs_evaluations": 0,
            "midpoint_iterations": 0,
            "max_midpoint_residual": 0.0,
        }
        self._stats_lock = threading.Lock()

    def _rk4(self, y: FloatArray, dt: float) -> FloatArray:
        f = self._f
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        with self._stats_lock:
            self.stats["rhs_evaluations"] += 4
        return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def _midpoint(self, y: FloatArray, dt: float, index: int) -> FloatArray:
        f = self._f
        y1 = y + dt * f(y)
        residual = np.inf
        iterations = 0
        # convergence is judged on the momentum part only; p is a constant
        while iterations < MIDPOINT_MAX_ITER:
            y_next = y + dt * f(0.5 * (y + y1))
            iterations += 1
            residual = float(np.max(np.abs(y_next[:3] - y1[:3])))
            y1 = y_next
            if residual <= MIDPOINT_TOL * max(1.0, float(np.max(np.abs(y1[:3])))):
                # one more sweep pushes the fixed-point error below roundoff
                y1 = y + dt * f(0.5 * (y + y1))
                iterations += 1
                break
        else:
            raise ConvergenceError(index, residual, iterations)

        with self._stats_lock:
            self.stats["rhs_evaluations"] += iterations + 1
            self.stats["midpoint_iterations"] += iterations
            self.stats["max_midpoint_residual"] = max(self.stats["max_midpoint_residual"], residual)
        return y1

    def step(self, y: FloatArray, index: int = 0) -> FloatArray:
        dt = float(self.config.dt)
        if self.config.integrator == "rk4":
            out = self._rk4(y, dt)
        else:
            out = self._midpoint(y, dt, index)
        with self._stats_lock:
            self.stats["steps"] += 1
        return out

    def run(self) -> Trajectory:
        cfg = self.config
        n = int(cfg.steps)
        y = cfg.initial_state()
        states = np.empty((n + 1, y.shape[0]))
        states[0] = y
        for k in range(n):
            y = self.step(y, k)
            states[k + 1] = y

        momenta = states[:, :3]
        times = cfg.dt * np.arange(n + 1)
        poses = reconstruct_pose(momenta, cfg.mass, cfg.initial_pose, cfg.dt, order=cfg.pose_order)
        with self._stats_lock:
            stats = dict(self.stats)
        log.debug("integrated %d steps (%s, %s): %s", n, cfg.integrator, cfg.space, stats)
        return _diagnose(cfg, times, momenta, poses, stats)


def _diagnose(cfg: SimConfig, times: FloatArray, momenta: FloatArray, poses: FloatArray,
              stats: Dict[str, float]) -> Trajectory:
    m_inv = cfg.mass.M_inv
    gam = cfg.effective_gamma
    zeta = momenta @ m_inv.T
    if cfg.space == "osc":
        energy = hamiltonian_osc(np.column_stack([momenta, np.full(momenta.shape[0], cfg.p)]), cfg.mass)
    else:
        energy = 0.5 * np.einsum("ij,ij->i", momenta, zeta)
    p2 = momenta[:, 1] ** 2 + momenta[:, 2] ** 2
    if gam != 0.0:
        casimir = momenta[:, 0] + algebra.constants(cfg.mode).casimir_c * p2 / gam
    else:
        casimir = p2

    c, s = np.cos(poses[:, 0]), np.sin(poses[:, 0])
    spatial = np.column_stack([c * momenta[:, 1] - s * momenta[:, 2], s * momenta[:, 1] + c * momenta[:, 2]])
    force = np.column_stack([-gam * zeta[:, 2], gam * zeta[:, 1]])

    arrays = [times, momenta.copy(), poses, energy, casimir, spatial, force]
    for a in arrays:
        a.flags.writeable = False
    return Trajectory(
        times=arrays[0], momenta=arrays[1], poses=arrays[2], hamiltonian=arrays[3],
        casimir=arrays[4], spatial_momentum=arrays[5], force=arrays[6],
        gamma=float(cfg.gamma), space=cfg.space,
        p=cfg.p if cfg.space == "osc" else None, stats=stats,
    )


def step(state, config: SimConfig, index: int = 0) -> FloatArray:
    return Integrator(config).step(np.asarray(state, dtype=np.float64), index)


def integrate(config: SimConfig) -> Trajectory:
    return Integrator(config).run()


def integrate_many(configs: Sequence[SimConfig], parallel: Union[bool, int] = True) -> List[Trajectory]:
    """Independent trajectories, returned in input order."""
    configs = list(configs)
    if not parallel or len(configs) <= 1:
        return [integrate(c) for c in configs]

    workers = len(configs) if parallel is True else max(1, int(parallel))
    results: List[Optional[Trajectory]] = [None] * len(configs)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(integrate, c): i for i, c in enumerate(configs)}
        for fut in as_completed(futures):
            results[futures[fut]] = fut.result()
    return results  # type: ignore[return-value]


# ---------- pose reconstruction ----------


def _lagrange_weights(nodes: FloatArray, t: float) -> FloatArray:
    w = np.ones(nodes.shape[0])
    for i, ti in enumerate(nodes):
        for j, tj in enumerate(nodes):
            if i != j:
                w[i] *= (t - tj) / (ti - tj)
    return w


def reconstruct_pose(momenta, mass: MassModel, initial_pose: Optional[Se2Element], dt: float,
                     order: int = 2) -> FloatArray:
    """
    Integrate dg/dt = g zeta(t) from momenta sampled every dt. Returns rows (theta, x, y).

    order 2: g_{k+1} = g_k exp(dt (zeta_k + zeta_{k+1}) / 2).
    order 4: two-point Gauss Magnus step, zeta at the Gauss nodes from cubic interpolation
    of the neighbouring samples.
    """
    pm = np.asarray(momenta, dtype=np.float64).reshape(-1, 3)
    zeta = pm @ mass.M_inv.T
    n = zeta.shape[0]
    g = initial_pose or Se2Element()
    out = np.empty((n, 3))
    out[0] = (g.theta, g.x, g.y)

    if order == 4 and n >= 4:
        stencil = np.arange(4.0)
        weights = {
            (offset, c): _lagrange_weights(stencil, offset + c)
            for offset in (0, 1, 2) for c in _GAUSS_NODES
        }
    elif order not in (2, 4):
        raise ConfigError(f"pose order must be 2 or 4, got {order}")

    for k in range(n - 1):
        if order == 4 and n >= 4:
            j0 = min(max(k - 1, 0), n - 4)
            block = zeta[j0:j0 + 4]
            a1 = weights[(k - j0, _GAUSS_NODES[0])] @ block
            a2 = weights[(k - j0, _GAUSS_NODES[1])] @ block
            comm = np.asarray(algebra.lie_bracket_se2(a1, a2))
            increment = 0.5 * dt * (a1 + a2) + (_SQRT3 * dt * dt / 12.0) * comm
        else:
            increment = 0.5 * dt * (zeta[k] + zeta[k + 1])
        g = algebra.compose(g, algebra.exp(increment))
        out[k + 1] = (g.theta, g.x, g.y)
    return out


# ---------- isotropic closed form ----------


@dataclass(frozen=True)
class IsotropicSolution:
    """
    Exact motion for M = diag(I, m, m): Omega = Pi / I is constant, P rotates at
    omega = Omega - Gamma/m, and the body center turns at kappa = Gamma/m.
    """
    initial_momentum: FloatArray
    initial_pose: Se2Element
    m: float
    inertia: float
    gamma: float

    @property
    def omega(self) -> float:
        return float(self.initial_momentum[0] / self.inertia)

    @property
    def momentum_rate(self) -> float:
        return self.omega - self.gamma / self.m

    @property
    def kappa(self) -> float:
        return self.gamma / self.m

    @property
    def momentum_period(self) -> float:
        w = abs(self.momentum_rate)
        return 2.0 * np.pi / w if w > 0.0 else np.inf

    @property
    def path_period(self) -> float:
        return 2.0 * np.pi * self.m / abs(self.gamma) if self.gamma != 0.0 else np.inf

    @property
    def radius(self) -> float:
        p0 = self.initial_momentum[1:]
        return float(np.hypot(*p0) / abs(self.gamma)) if self.gamma != 0.0 else np.inf

    @property
    def center(self) -> FloatArray:
        if self.gamma == 0.0:
            raise MassModelError("no circular path at zero circulation")
        # x0 + R_theta0 (b3 x P0) / Gamma
        g = self.initial_pose
        p0 = self.initial_momentum[1:]
        return g.x0 + g.rotation @ np.array([-p0[1], p0[0]]) / self.gamma

    def momentum(self, t) -> FloatArray:
        ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
        phi = -self.momentum_rate * ts
        c, s = np.cos(phi), np.sin(phi)
        px, py = self.initial_momentum[1], self.initial_momentum[2]
        return np.column_stack([np.full_like(ts, self.initial_momentum[0]), c * px - s * py, s * px + c * py])

    def pose(self, t) -> FloatArray:
        ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
        g = self.initial_pose
        theta = g.theta + self.omega * ts
        u = g.rotation @ (self.initial_momentum[1:] / self.m)
        if self.gamma == 0.0:
            xy = g.x0[None, :] + ts[:, None] * u[None, :]
        else:
            k = self.kappa
            a, b = np.sin(k * ts) / k, (1.0 - np.cos(k * ts)) / k
            xy = g.x0[None, :] + np.column_stack([a * u[0] - b * u[1], b * u[0] + a * u[1]])
        return np.column_stack([theta, xy])


def analytic_isotropic(initial_momentum, mass: Union[MassModel, Tuple[float, float]], gamma: float,
                       initial_pose: Optional[Se2Element] = None) -> IsotropicSolution:
    """`mass` is a MassModel (must be isotropic) or the pair (m_total, I_total)."""
    if isinstance(mass, MassModel):
        if not mass.is_isotropic:
            raise MassModelError("analytic solution needs an isotropic mass matrix diag(I, m, m)")
        m, inertia = float(mass.M[1, 1]), float(mass.M[0, 0])
    else:
        m, inertia = (float(v) for v in mass)
    if m <= 0.0 or inertia <= 0.0:
        raise MassModelError("isotropic mass and inertia must be positive")
    pm = np.asarray(initial_momentum, dtype=np.float64).reshape(3).copy()
    pm.flags.writeable = False
    return IsotropicSolution(pm, initial_pose or Se2Element(), m, inertia, float(gamma))

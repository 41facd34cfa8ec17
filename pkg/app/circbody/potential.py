"""
Exterior potential flow around a body: Kirchhoff velocity potentials by a source-panel
boundary-element method, the added-mass matrix, the circulatory flow, the velocity field and
the circulation part of the curvature as a boundary integral.

Normals point out of the body into the fluid. With that convention the added mass is
(M_f)_ij = -rho * sum_k Phi_i Phi_j,n dS, which is positive semidefinite.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import InsideBodyError, MassModelError, NeumannError
from .geometry import BodyBoundary, FloatArray, point_in_body, rigid_mass
from .panels import PanelSystem, build_panel_system, source_influence
from .settings import DEFAULT_DENSITY, MASS_ASYMMETRY_TOL, NEUMANN_FLUX_TOL

log = logging.getLogger("circbody.potential")

LABELS = ("omega", "x", "y")

# relative pivot size below which the collocation matrix counts as singular
_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class NeumannSolution:
    body: BodyBoundary
    label: str
    neumann_data: FloatArray
    source_strengths: FloatArray
    phi_boundary: FloatArray
    # additive constant removed from the raw single-layer values
    phi_offset: float
    tangential_speed: FloatArray
    residual: float

    def velocity_at(self, points) -> FloatArray:
        _, vel = source_influence(self.body, points)
        return np.einsum("mjk,j->mk", vel, self.source_strengths)

    def potential_at(self, points) -> FloatArray:
        phi, _ = source_influence(self.body, points)
        return phi @ self.source_strengths - self.phi_offset


@dataclass(frozen=True)
class MassModel:
    M_b: FloatArray
    M_f: FloatArray
    M: FloatArray
    density: float
    M_inv: FloatArray
    asymmetry: float = 0.0

    @property
    def is_isotropic(self) -> bool:
        m = self.M
        off = max(abs(m[0, 1]), abs(m[0, 2]), abs(m[1, 2]))
        scale = float(np.max(np.abs(m)))
        return off <= 1e-12 * scale and abs(m[1, 1] - m[2, 2]) <= 1e-12 * scale


@dataclass(frozen=True)
class CirculatoryFlow:
    body: BodyBoundary
    gamma: float
    tangential_speed: FloatArray
    source_strengths: FloatArray
    normal_residual: float


# ---------- mass model ----------


def make_mass_model(M_b, M_f=None, density: float = DEFAULT_DENSITY, asymmetry: float = 0.0) -> MassModel:
    """Validate and bundle the mass blocks. M = M_b + M_f must be symmetric positive definite."""
    mb = np.array(M_b, dtype=np.float64)
    mf = np.zeros((3, 3)) if M_f is None else np.array(M_f, dtype=np.float64)
    if mb.shape != (3, 3) or mf.shape != (3, 3):
        raise MassModelError("mass blocks must be 3x3")
    m = mb + mf
    if not np.isfinite(m).all():
        raise MassModelError("mass matrix contains non-finite values")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.max(np.abs(m))))):
        raise MassModelError("total mass matrix is not symmetric")
    try:
        factor = scipy.linalg.cho_factor(m)
    except np.linalg.LinAlgError as exc:
        raise MassModelError(f"total mass matrix is not positive definite: {exc}") from exc
    m_inv = scipy.linalg.cho_solve(factor, np.eye(3))
    m_inv = 0.5 * (m_inv + m_inv.T)

    arrays = []
    for a in (mb, mf, m, m_inv):
        a.flags.writeable = False
        arrays.append(a)
    return MassModel(M_b=arrays[0], M_f=arrays[1], M=arrays[2], density=float(density),
                     M_inv=arrays[3], asymmetry=float(asymmetry))


# ---------- Neumann problems ----------


def _check_flux(body: BodyBoundary, data: FloatArray) -> None:
    flux = float(np.dot(data, body.lengths))
    scale = max(1.0, float(np.dot(np.abs(data), body.lengths)))
    if abs(flux) > NEUMANN_FLUX_TOL * scale:
        raise NeumannError(f"incompatible Neumann data: net flux {flux:.6e} is not zero")


def _solve_columns(system: PanelSystem, data: FloatArray) -> Tuple[FloatArray, float]:
    """LU solve of the collocation system A sigma = data for one or more columns of data."""
    body = system.body
    n = body.n_panels
    rhs = data.reshape(n, -1)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(system.normal)
    pivots = np.abs(np.diag(lu))
    if not np.isfinite(pivots).all() or pivots.min() <= _PIVOT_TOL * pivots.max():
        raise NeumannError(
            f"singular influence matrix (smallest pivot {pivots.min():.3e}); "
            "use more panels or a non-degenerate body"
        )
    sigma = scipy.linalg.lu_solve((lu, piv), rhs)
    residual = float(np.max(np.abs(system.normal @ sigma - rhs)))
    return sigma, residual


def contour_derivative(body: BodyBoundary, values: FloatArray) -> FloatArray:
    """
    Per-panel derivative along the contour of midpoint values, from node values interpolated
    linearly between neighbouring midpoints. Its loop integral vanishes exactly.
    """
    d = body.lengths
    prev_v, prev_d = np.roll(values, 1), np.roll(d, 1)
    at_node = (prev_v * d + values * prev_d) / (prev_d + d)
    return (np.roll(at_node, -1) - at_node) / d


def _make_solution(system: PanelSystem, data: FloatArray, sigma: FloatArray,
                   residual: float, label: str) -> NeumannSolution:
    body = system.body
    raw = system.potential @ sigma
    offset = float(np.dot(raw, body.lengths) / body.perimeter)
    out = []
    for a in (data.copy(), sigma.copy(), raw - offset, contour_derivative(body, raw)):
        a.flags.writeable = False
        out.append(a)
    return NeumannSolution(
        body=body, label=label, neumann_data=out[0], source_strengths=out[1],
        phi_boundary=out[2], phi_offset=offset, tangential_speed=out[3], residual=residual,
    )


def solve_neumann(body: BodyBoundary, neumann_data, *, label: str = "custom",
                  system: Optional[PanelSystem] = None) -> NeumannSolution:
    """
    Exterior Neumann problem for per-panel normal velocity data.
    The boundary values are shifted to zero length-weighted mean.
    """
    data = np.asarray(neumann_data, dtype=np.float64).reshape(-1)
    if data.shape[0] != body.n_panels:
        raise NeumannError(f"expected {body.n_panels} Neumann values, got {data.shape[0]}")
    _check_flux(body, data)

    system = system or build_panel_system(body)
    sigma, residual = _solve_columns(system, data)
    return _make_solution(system, data, sigma[:, 0], residual, label)


def kirchhoff_data(body: BodyBoundary) -> FloatArray:
    """Columns: (X x n).b3, n.b1, n.b2 at the panel midpoints."""
    x, y = body.midpoints[:, 0], body.midpoints[:, 1]
    nx, ny = body.normals[:, 0], body.normals[:, 1]
    return np.column_stack([x * ny - y * nx, nx, ny])


def kirchhoff_potentials(body: BodyBoundary, *, system: Optional[PanelSystem] = None
                         ) -> Tuple[NeumannSolution, NeumannSolution, NeumannSolution]:
    system = system or build_panel_system(body)
    data = kirchhoff_data(body)
    for k in range(3):
        _check_flux(body, data[:, k])

    sigma, residual = _solve_columns(system, data)
    sols = tuple(
        _make_solution(system, data[:, k], sigma[:, k], residual, LABELS[k]) for k in range(3)
    )
    log.info("solved %d panels, collocation residual %.2e", body.n_panels, residual)
    return sols  # type: ignore[return-value]


def combine(potentials: Sequence[NeumannSolution], zeta) -> Tuple[FloatArray, FloatArray]:
    """Boundary values and source strengths of Phi_zeta = Omega Phi_Omega + Vx Phi_x + Vy Phi_y."""
    z = np.asarray(zeta, dtype=np.float64)
    phi = sum(z[k] * potentials[k].phi_boundary for k in range(3))
    sigma = sum(z[k] * potentials[k].source_strengths for k in range(3))
    return np.asarray(phi), np.asarray(sigma)


# ---------- added mass ----------


def fluid_mass_matrix(body: BodyBoundary, potentials: Sequence[NeumannSolution],
                      density: float = DEFAULT_DENSITY) -> Tuple[FloatArray, float]:
    phi = np.column_stack([p.phi_boundary for p in potentials])
    dphi = np.column_stack([p.neumann_data for p in potentials])
    raw = -float(density) * (phi * body.lengths[:, None]).T @ dphi

    scale = float(np.max(np.abs(raw))) or 1.0
    asymmetry = float(np.max(np.abs(raw - raw.T))) / scale
    return 0.5 * (raw + raw.T), asymmetry


def added_mass(body: BodyBoundary, density: float = DEFAULT_DENSITY, *,
               potentials: Optional[Sequence[NeumannSolution]] = None) -> MassModel:
    potentials = potentials or kirchhoff_potentials(body)
    m_f, asymmetry = fluid_mass_matrix(body, potentials, density)
    if asymmetry > MASS_ASYMMETRY_TOL:
        log.warning("added-mass asymmetry %.3e before symmetrization", asymmetry)

    scale = float(np.max(np.abs(m_f))) or 1.0
    if float(np.min(np.linalg.eigvalsh(m_f))) < -1e-8 * scale:
        raise MassModelError("added-mass matrix is not positive semidefinite; refine the panels")

    rigid = rigid_mass(body, density)
    model = make_mass_model(rigid.matrix, m_f, density, asymmetry)
    log.debug("M_f diag = %s", np.array2string(np.diag(m_f), precision=6))
    return model


def kinetic_energy_fluid(body: BodyBoundary, zeta, mass: MassModel,
                         potentials: Sequence[NeumannSolution]) -> Tuple[float, float]:
    """(1/2 zeta^T M_f zeta, the same energy as -rho/2 times the boundary integral of Phi dPhi/dn)."""
    z = np.asarray(zeta, dtype=np.float64)
    quad = 0.5 * float(z @ mass.M_f @ z)
    phi, _ = combine(potentials, z)
    dphi = kirchhoff_data(body) @ z
    boundary = -0.5 * mass.density * float(np.sum(phi * dphi * body.lengths))
    return quad, boundary


# ---------- circulation ----------


def vortex_velocity(points, gamma: float) -> FloatArray:
    """Counterclockwise point vortex of strength gamma at the body-frame origin."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    r2 = np.sum(pts * pts, axis=1)
    k = float(gamma) / (2.0 * np.pi * r2)
    return np.column_stack([-k * pts[:, 1], k * pts[:, 0]])


def _vortex_panel_averages(body: BodyBoundary, gamma: float) -> Tuple[FloatArray, FloatArray]:
    a, b = body.panel_ends
    ra = np.hypot(a[:, 0], a[:, 1])
    rb = np.hypot(b[:, 0], b[:, 1])
    # flux through a panel is the stream-function jump, subtended angle gives the circulation
    flux = float(gamma) / (2.0 * np.pi) * np.log(ra / rb)
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    turn = float(gamma) / (2.0 * np.pi) * np.arctan2(cross, dot)
    return flux / body.lengths, turn / body.lengths


def circulatory_flow(body: BodyBoundary, gamma: float, *,
                     system: Optional[PanelSystem] = None) -> CirculatoryFlow:
    """
    Point vortex at the conformal center plus a source-panel correction that cancels its
    panel-averaged normal velocity.
    """
    gamma = float(gamma)
    n = body.n_panels
    if gamma == 0.0:
        zeros = np.zeros(n)
        zeros.flags.writeable = False
        return CirculatoryFlow(body=body, gamma=0.0, tangential_speed=zeros,
                               source_strengths=zeros, normal_residual=0.0)

    normal_avg, tangent_avg = _vortex_panel_averages(body, gamma)
    system = system or build_panel_system(body)
    correction = solve_neumann(body, -normal_avg, label="circulation", system=system)

    # correction speed from differences of its boundary potential, so it adds no circulation
    speed = tangent_avg + correction.tangential_speed
    speed.flags.writeable = False
    residual = float(np.max(np.abs(system.normal @ correction.source_strengths + normal_avg)))
    return CirculatoryFlow(body=body, gamma=gamma, tangential_speed=speed,
                           source_strengths=correction.source_strengths, normal_residual=residual)


def boundary_moments(flow: CirculatoryFlow) -> Tuple[float, float, float]:
    """Loop integrals of alpha_Gamma, x alpha_Gamma and y alpha_Gamma over the boundary."""
    body = flow.body
    w = flow.tangential_speed * body.lengths
    return (
        float(np.sum(w)),
        float(np.sum(body.midpoints[:, 0] * w)),
        float(np.sum(body.midpoints[:, 1] * w)),
    )


# ---------- field ----------


def velocity_field(body: BodyBoundary, zeta, gamma: float, points, *,
                   potentials: Optional[Sequence[NeumannSolution]] = None,
                   flow: Optional[CirculatoryFlow] = None) -> FloatArray:
    """u = grad Phi_zeta + u_Gamma at points outside the body, body frame, shape (M, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    inside = np.flatnonzero(point_in_body(body, pts))
    if inside.size:
        raise InsideBodyError(inside)

    z = np.asarray(zeta, dtype=np.float64)
    gamma = float(gamma)
    sigma = np.zeros(body.n_panels)
    if np.any(z != 0.0):
        potentials = potentials or kirchhoff_potentials(body)
        _, sigma = combine(potentials, z)
    if gamma != 0.0:
        flow = flow if (flow is not None and flow.gamma == gamma) else circulatory_flow(body, gamma)
        sigma = sigma + flow.source_strengths

    u = np.zeros_like(pts)
    if np.any(sigma != 0.0):
        _, vel = source_influence(body, pts)
        u = np.einsum("mjk,j->mk", vel, sigma)
    if gamma != 0.0:
        u = u + vortex_velocity(pts, gamma)
    return u


# ---------- curvature ----------


def curvature_gamma(body: BodyBoundary, gamma: float, zeta1, zeta2, *,
                    flow: Optional[CirculatoryFlow] = None) -> float:
    """
    -sum over panels of alpha_Gamma times *(dPsi_1 ^ dPsi_2) on the boundary, with
    *(dPsi_1 ^ dPsi_2) = (V1y V2x - V1x V2y) + Omega_1 X.V2 - Omega_2 X.V1.
    """
    z1 = np.asarray(zeta1, dtype=np.float64)
    z2 = np.asarray(zeta2, dtype=np.float64)
    o1, v1 = z1[0], z1[1:]
    o2, v2 = z2[0], z2[1:]

    flow = flow if (flow is not None and flow.gamma == float(gamma)) else circulatory_flow(body, gamma)
    X = body.midpoints
    f = (v1[1] * v2[0] - v1[0] * v2[1]) + o1 * (X @ v2) - o2 * (X @ v1)
    return -float(np.sum(f * flow.tangential_speed * body.lengths))

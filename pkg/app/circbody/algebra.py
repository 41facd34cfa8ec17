"""
SE(2), its oscillator central extension, and the Poisson structures on se(2)* and osc*.

Conventions:
  g = (R_theta, x0) acts as the 3x3 matrix [[R, x0], [0, 1]].
  zeta = (Omega, Vx, Vy) in se(2), pi = (Pi, Px, Py) in se(2)*, pairing Pi*Omega + P.V.
  J = [[0, 1], [-1, 0]], so J (1, 0) = (0, -1) and b3 x v = -J v.
  Poisson brackets are the minus Lie-Poisson brackets: {Pi, Px} = -Py.

Where a normalization is in doubt two modes exist: "paper" keeps the printed factors,
"verified" uses constants solved at import time from the bracket itself (see VERIFIED).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from .errors import DimensionError, SingularCirculationError
from .geometry import FloatArray

log = logging.getLogger("circbody.algebra")

J = np.array([[0.0, 1.0], [-1.0, 0.0]])
J.flags.writeable = False

MODES = ("paper", "verified")
SPACES = ("se2", "se2_magnetic", "osc")

# ---------- elements ----------


@dataclass(frozen=True)
class Se2Element:
    theta: float = 0.0
    x: float = 0.0
    y: float = 0.0

    @property
    def x0(self) -> FloatArray:
        return np.array([self.x, self.y])

    @property
    def rotation(self) -> FloatArray:
        return rot(self.theta)

    def matrix(self) -> FloatArray:
        m = np.eye(3)
        m[:2, :2] = self.rotation
        m[:2, 2] = self.x0
        return m

    @classmethod
    def from_matrix(cls, m) -> "Se2Element":
        m = np.asarray(m, dtype=np.float64)
        return cls(float(np.arctan2(m[1, 0], m[0, 0])), float(m[0, 2]), float(m[1, 2]))


@dataclass(frozen=True)
class Se2Vector:
    omega: float = 0.0
    vx: float = 0.0
    vy: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return np.array([self.omega, self.vx, self.vy], dtype=dtype)

    @property
    def v(self) -> FloatArray:
        return np.array([self.vx, self.vy])


@dataclass(frozen=True)
class Se2Momentum:
    pi: float = 0.0
    px: float = 0.0
    py: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return np.array([self.pi, self.px, self.py], dtype=dtype)

    @property
    def p(self) -> FloatArray:
        return np.array([self.px, self.py])

    @classmethod
    def from_array(cls, a) -> "Se2Momentum":
        a = np.asarray(a, dtype=np.float64)
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class OscMomentum:
    momentum: Se2Momentum
    p: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.momentum.pi, self.momentum.px, self.momentum.py, self.p], dtype=dtype)

    @classmethod
    def from_array(cls, a) -> "OscMomentum":
        a = np.asarray(a, dtype=np.float64)
        return cls(Se2Momentum.from_array(a[:3]), float(a[3]))


@dataclass(frozen=True)
class OscElement:
    g: Se2Element
    a: float = 0.0


def _vec(z, dim: int = 3) -> FloatArray:
    out = np.asarray(z, dtype=np.float64).reshape(-1)
    if out.shape[0] != dim:
        raise DimensionError(f"expected a {dim}-vector, got {out.shape[0]} components")
    return out


def rot(theta: float) -> FloatArray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def identity() -> Se2Element:
    return Se2Element()


def compose(g: Se2Element, h: Se2Element) -> Se2Element:
    x = g.x0 + g.rotation @ h.x0
    return Se2Element(g.theta + h.theta, float(x[0]), float(x[1]))


def inverse(g: Se2Element) -> Se2Element:
    x = -(g.rotation.T @ g.x0)
    return Se2Element(-g.theta, float(x[0]), float(x[1]))


def _exp_coeffs(phi: float) -> Tuple[float, float]:
    # sin(phi)/phi and (1 - cos(phi))/phi
    if abs(phi) < 1e-4:
        p2 = phi * phi
        return 1.0 - p2 / 6.0 + p2 * p2 / 120.0, phi / 2.0 - phi * p2 / 24.0 + phi * p2 * p2 / 720.0
    return np.sin(phi) / phi, (1.0 - np.cos(phi)) / phi


def exp(zeta, t: float = 1.0) -> Se2Element:
    z = _vec(zeta)
    phi = float(z[0] * t)
    a, b = _exp_coeffs(phi)
    v = t * z[1:]
    x = np.array([a * v[0] - b * v[1], b * v[0] + a * v[1]])
    return Se2Element(phi, float(x[0]), float(x[1]))


def hat(zeta) -> FloatArray:
    z = _vec(zeta)
    return np.array([[0.0, -z[0], z[1]], [z[0], 0.0, z[2]], [0.0, 0.0, 0.0]])


# ---------- adjoint / coadjoint ----------


def ad_action(g: Se2Element, zeta) -> Se2Vector:
    """Ad_{g^-1} zeta = (Omega, R^T (V + Omega b3 x x0))."""
    z = _vec(zeta)
    x0 = g.x0
    v = g.rotation.T @ (z[1:] - z[0] * (J @ x0))
    return Se2Vector(float(z[0]), float(v[0]), float(v[1]))


def coad_action(g: Se2Element, momentum) -> Se2Momentum:
    """
    Ad*_{g^-1} pi, the transpose of ad_action under the pairing. Invariance pairs it with
    ad_action(inverse(g), zeta).
    """
    m = _vec(momentum)
    rp = g.rotation @ m[1:]
    return Se2Momentum(float(m[0] - rp @ (J @ g.x0)), float(rp[0]), float(rp[1]))


def pairing(momentum, zeta) -> float:
    return float(_vec(momentum) @ _vec(zeta))


def lie_bracket_se2(zeta1, zeta2) -> Se2Vector:
    """(0, -Omega_1 J V_2 + Omega_2 J V_1)."""
    z1, z2 = _vec(zeta1), _vec(zeta2)
    v = -z1[0] * (J @ z2[1:]) + z2[0] * (J @ z1[1:])
    return Se2Vector(0.0, float(v[0]), float(v[1]))


def bracket_from_adjoint(zeta1, zeta2, h: float = 1e-6) -> Se2Vector:
    """d/dt Ad_{exp(t zeta1)} zeta2 at t = 0, by central differences."""
    plus = np.asarray(ad_action(inverse(exp(zeta1, h)), zeta2))
    minus = np.asarray(ad_action(inverse(exp(zeta1, -h)), zeta2))
    d = (plus - minus) / (2.0 * h)
    return Se2Vector(float(d[0]), float(d[1]), float(d[2]))


def bracket_from_matrices(zeta1, zeta2) -> Se2Vector:
    c = hat(zeta1) @ hat(zeta2) - hat(zeta2) @ hat(zeta1)
    return Se2Vector(float(c[1, 0]), float(c[0, 2]), float(c[1, 2]))


# ---------- cocycles and the oscillator group ----------


def group_cocycle_B(g: Se2Element, h: Se2Element) -> float:
    return float(g.x0 @ (J @ (g.rotation @ h.x0)))


def cocycle_identity_residual(g: Se2Element, h: Se2Element, k: Se2Element) -> float:
    return abs(
        group_cocycle_B(g, h) + group_cocycle_B(compose(g, h), k)
        - group_cocycle_B(h, k) - group_cocycle_B(g, compose(h, k))
    )


def osc_compose(a: OscElement, b: OscElement) -> OscElement:
    return OscElement(compose(a.g, b.g), a.a + b.a + group_cocycle_B(a.g, b.g))


def osc_inverse(a: OscElement) -> OscElement:
    gi = inverse(a.g)
    return OscElement(gi, -a.a - group_cocycle_B(a.g, gi))


def _symplectic_area(v1: FloatArray, v2: FloatArray) -> float:
    return float(v1 @ (J @ v2))


def algebra_cocycle_from_group(zeta1, zeta2, h: float = 1e-4) -> float:
    """
    Mixed second derivative at (0, 0) of B(exp(t zeta1), exp(s zeta2)) - B(exp(s zeta2), exp(t zeta1)).
    """
    def f(t: float, s: float) -> float:
        g, k = exp(zeta1, t), exp(zeta2, s)
        return group_cocycle_B(g, k) - group_cocycle_B(k, g)

    return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)


# ---------- Poisson structures ----------


def _linear_se2(m: FloatArray) -> FloatArray:
    _, px, py = m
    return np.array([
        [0.0, -py, px],
        [py, 0.0, 0.0],
        [-px, 0.0, 0.0],
    ])


def _osc_matrix(point: FloatArray, cocycle_scale: float) -> FloatArray:
    out = np.zeros((4, 4))
    out[:3, :3] = _linear_se2(point[:3])
    out[1, 2] = -cocycle_scale * point[3]
    out[2, 1] = cocycle_scale * point[3]
    return out


@dataclass(frozen=True)
class PoissonStructure:
    space: str
    gamma: float = 0.0
    cocycle_scale: float = 1.0

    @property
    def dim(self) -> int:
        return 4 if self.space == "osc" else 3

    def matrix(self, point) -> FloatArray:
        x = _vec(point, self.dim)
        if self.space == "osc":
            return _osc_matrix(x, self.cocycle_scale)
        out = _linear_se2(x)
        if self.space == "se2_magnetic":
            out[1, 2] = -self.gamma
            out[2, 1] = self.gamma
        return out


def poisson_structure(space: str, *, gamma: float = 0.0, cocycle_mode: str = "verified") -> PoissonStructure:
    if space not in SPACES:
        raise DimensionError(f"unknown space {space!r} (expected one of {', '.join(SPACES)})")
    scale = constants(cocycle_mode).cocycle_scale if space == "osc" else 1.0
    return PoissonStructure(space=space, gamma=float(gamma), cocycle_scale=scale)


def structure_matrix(space: str, point, *, gamma: float = 0.0, cocycle_mode: str = "verified") -> FloatArray:
    return poisson_structure(space, gamma=gamma, cocycle_mode=cocycle_mode).matrix(point)


@dataclass(frozen=True)
class QuadraticField:
    """f(x) = c + b.x + x^T A x / 2 with A symmetric."""
    c: float
    b: FloatArray
    A: FloatArray

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(self.c + self.b @ x + 0.5 * x @ self.A @ x)

    def grad(self, x) -> FloatArray:
        return self.b + self.A @ np.asarray(x, dtype=np.float64)

    @classmethod
    def coordinate(cls, k: int, dim: int) -> "QuadraticField":
        b = np.zeros(dim)
        b[k] = 1.0
        return cls(0.0, b, np.zeros((dim, dim)))

    @classmethod
    def random(cls, rng: np.random.Generator, dim: int, scale: float = 0.5) -> "QuadraticField":
        a = scale * rng.standard_normal((dim, dim))
        return cls(float(scale * rng.standard_normal()), scale * rng.standard_normal(dim), 0.5 * (a + a.T))


StructureFn = Callable[[FloatArray], FloatArray]


def _as_structure(space, gamma: float, cocycle_mode: str) -> Tuple[StructureFn, int]:
    if isinstance(space, PoissonStructure):
        return space.matrix, space.dim
    if callable(space):
        raise DimensionError("a bare structure callable needs an explicit dimension; wrap it in a tuple (fn, dim)")
    if isinstance(space, tuple):
        fn, dim = space
        return fn, int(dim)
    ps = poisson_structure(space, gamma=gamma, cocycle_mode=cocycle_mode)
    return ps.matrix, ps.dim


def bracket_eval(space, f, g, point, *, gamma: float = 0.0, cocycle_mode: str = "verified") -> float:
    """(grad f)^T Lambda(point) grad g. f and g provide grad(x)."""
    fn, dim = _as_structure(space, gamma, cocycle_mode)
    x = _vec(point, dim)
    return float(f.grad(x) @ fn(x) @ g.grad(x))


def _bracket_grad(fn: StructureFn, g: QuadraticField, h: QuadraticField, x: FloatArray) -> FloatArray:
    lam = fn(x)
    gg, gh = g.grad(x), h.grad(x)
    out = g.A @ (lam @ gh) + h.A @ (lam.T @ gg)
    # Lambda is affine in the point, so a unit difference is its exact partial derivative
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = 1.0
        out[k] += gg @ (fn(x + e) - lam) @ gh
    return out


def jacobi_residual(space, point, fields: Sequence[QuadraticField], *,
                    gamma: float = 0.0, cocycle_mode: str = "verified") -> float:
    """|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| for quadratic fields with exact gradients."""
    fn, dim = _as_structure(space, gamma, cocycle_mode)
    x = _vec(point, dim)
    f, g, h = fields
    lam = fn(x)

    total = 0.0
    for a, b, c in ((f, g, h), (g, h, f), (h, f, g)):
        total += a.grad(x) @ lam @ _bracket_grad(fn, b, c, x)
    return abs(float(total))


# ---------- normalization constants ----------


@dataclass(frozen=True)
class Constants:
    casimir_c: float
    cocycle_scale: float
    psi_c_omega: float
    psi_c_v: float
    # least-squares residuals of the defining conditions (zero in verified mode)
    residuals: Dict[str, float]


PAPER = Constants(casimir_c=1.0, cocycle_scale=2.0, psi_c_omega=0.25, psi_c_v=0.5, residuals={})


def _fit_scalar(r0: FloatArray, r1: FloatArray) -> Tuple[float, float]:
    # min |r0 + c r1|
    c = -float(r1 @ r0) / float(r1 @ r1)
    return c, float(np.max(np.abs(r0 + c * r1)))


def _solve_casimir(points: FloatArray, gammas: FloatArray) -> Tuple[float, float]:
    r0, r1 = [], []
    for x, gam in zip(points, gammas):
        lam = PoissonStructure("se2_magnetic", gamma=gam).matrix(x)
        # grad of Pi + c |P|^2 / Gamma = e0 + c * (0, 2Px, 2Py) / Gamma
        g0 = np.array([1.0, 0.0, 0.0])
        g1 = np.array([0.0, 2.0 * x[1], 2.0 * x[2]]) / gam
        for k in range(3):
            r0.append(g0 @ lam[:, k])
            r1.append(g1 @ lam[:, k])
    return _fit_scalar(np.array(r0), np.array(r1))


def _solve_cocycle_scale(points: FloatArray, gammas: FloatArray) -> Tuple[float, float]:
    r0, r1 = [], []
    for x, gam in zip(points, gammas):
        target = PoissonStructure("se2_magnetic", gamma=gam).matrix(x)
        osc0 = _osc_matrix(np.append(x, gam), 0.0)[:3, :3]
        osc1 = _osc_matrix(np.append(x, gam), 1.0)[:3, :3] - osc0
        r0.extend((osc0 - target).ravel())
        r1.extend(osc1.ravel())
    return _fit_scalar(np.array(r0), np.array(r1))


def _solve_psi(rng: np.random.Generator, n: int) -> Tuple[float, float, float]:
    """
    Fit (c_Omega, c_V) in psi = (-c_Omega G |x0|^2, c_V G J x0) to i_xi B = d<psi, xi>,
    with B = G dx ^ dy and the left-action generator xi_H = Omega d_theta + (V - Omega J x0).grad.
    Rows are the (d_theta, dx, dy) components.
    """
    rows, rhs = [], []
    for _ in range(n):
        gam = float(rng.uniform(0.5, 3.0)) * (1 if rng.random() < 0.5 else -1)
        x0 = rng.standard_normal(2)
        om, v = float(rng.standard_normal()), rng.standard_normal(2)
        w = v - om * (J @ x0)
        target = np.array([0.0, -gam * w[1], gam * w[0]])
        d_omega = np.array([0.0, -2.0 * gam * om * x0[0], -2.0 * gam * om * x0[1]])
        d_v = np.array([0.0, -gam * v[1], gam * v[0]])
        for k in range(3):
            rows.append([d_omega[k], d_v[k]])
            rhs.append(target[k])
    a, b = np.array(rows), np.array(rhs)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    return float(sol[0]), float(sol[1]), float(np.max(np.abs(a @ sol - b)))


def _solve_verified() -> Constants:
    rng = np.random.default_rng(20240611)
    points = rng.standard_normal((16, 3))
    gammas = rng.uniform(0.5, 3.0, 16) * np.where(rng.random(16) < 0.5, -1.0, 1.0)

    c, c_res = _solve_casimir(points, gammas)
    s, s_res = _solve_cocycle_scale(points, gammas)
    c_om, c_v, psi_res = _solve_psi(rng, 16)
    return Constants(
        casimir_c=c, cocycle_scale=s, psi_c_omega=c_om, psi_c_v=c_v,
        residuals={"casimir": c_res, "cocycle": s_res, "psi": psi_res},
    )


VERIFIED = _solve_verified()


def constants(mode: str) -> Constants:
    if mode == "paper":
        return PAPER
    if mode == "verified":
        return VERIFIED
    raise ValueError(f"unknown mode {mode!r} (expected paper or verified)")


def algebra_cocycle_C(zeta1, zeta2, normalization: str = "verified") -> float:
    z1, z2 = _vec(zeta1), _vec(zeta2)
    return constants(normalization).cocycle_scale * _symplectic_area(z1[1:], z2[1:])


# ---------- Casimirs, B_Gamma-potential, affine action ----------


def casimir_magnetic(momentum, gamma: float, coefficient_mode: str = "verified") -> float:
    if gamma == 0.0:
        raise SingularCirculationError("casimir undefined at zero circulation (singular limit)")
    m = _vec(momentum)
    return float(m[0] + constants(coefficient_mode).casimir_c * (m[1] ** 2 + m[2] ** 2) / gamma)


def kirchhoff_casimir(momentum) -> float:
    m = _vec(momentum)
    return float(m[1] ** 2 + m[2] ** 2)


def bg_potential(g: Se2Element, gamma: float, mode: str = "verified") -> Se2Momentum:
    k = constants(mode)
    x0 = g.x0
    lin = k.psi_c_v * gamma * (J @ x0)
    return Se2Momentum(float(-k.psi_c_omega * gamma * (x0 @ x0)), float(lin[0]), float(lin[1]))


def magnetic_form(g: Se2Element, gamma: float, v, w) -> float:
    """
    Left-invariant extension of gamma e*_x ^ e*_y at g, on tangent vectors
    (theta_dot, x_dot, y_dot).
    """
    rt = g.rotation.T
    bv = rt @ _vec(v)[1:]
    bw = rt @ _vec(w)[1:]
    return float(gamma * (bv[0] * bw[1] - bv[1] * bw[0]))


def bg_potential_residual(g: Se2Element, zeta, gamma: float, mode: str = "verified",
                          h: float = 1e-5) -> float:
    """
    max over coordinate directions of |d<psi, xi>(e_k) - B(xi_H, e_k)| with the left side by
    central differences in (theta, x, y).
    """
    z = _vec(zeta)

    def f(q: FloatArray) -> float:
        return pairing(bg_potential(Se2Element(*q), gamma, mode), z)

    q0 = np.array([g.theta, g.x, g.y])
    gen = np.concatenate([[z[0]], z[1:] - z[0] * (J @ g.x0)])

    worst = 0.0
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        dpsi = (f(q0 + h * e) - f(q0 - h * e)) / (2.0 * h)
        contraction = magnetic_form(g, gamma, gen, e)
        worst = max(worst, abs(dpsi - contraction))
    return worst


def affine_action(g: Se2Element, momentum, gamma: float, mode: str = "verified") -> Se2Momentum:
    m = np.asarray(coad_action(g, momentum)) + np.asarray(bg_potential(g, gamma, mode))
    return Se2Momentum.from_array(m)


def onecocycle_residual(g: Se2Element, h: Se2Element, gamma: float, mode: str = "verified") -> float:
    lhs = np.asarray(bg_potential(compose(g, h), gamma, mode))
    rhs = np.asarray(bg_potential(g, gamma, mode)) + np.asarray(coad_action(g, bg_potential(h, gamma, mode)))
    return float(np.max(np.abs(lhs - rhs)))


def random_element(rng: np.random.Generator, scale: float = 1.0) -> Se2Element:
    return Se2Element(float(rng.uniform(-np.pi, np.pi)), *(scale * rng.standard_normal(2)))


log.debug(
    "verified constants: casimir c=%.17g cocycle scale=%.17g psi=(%.17g, %.17g)",
    VERIFIED.casimir_c, VERIFIED.cocycle_scale, VERIFIED.psi_c_omega, VERIFIED.psi_c_v,
)

"""
Discretized body boundaries (circle, ellipse, Joukowski foil) and the rigid-body mass matrix.

The contour is a closed counterclockwise polygon of N nodes; panel i runs from node i to
node i+1 (mod N). Every body is placed so that the conformal center of its exterior map sits
at the body-frame origin.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from .errors import GeometryError
from .settings import DEFAULT_DENSITY, MIN_PANELS

log = logging.getLogger("circbody.geometry")

FloatArray = NDArray[np.float64]

SHAPES = ("circle", "ellipse", "joukowski")


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    radius: float = 0.0
    a: float = 0.0
    b: float = 0.0
    circle_radius: float = 0.0
    center: Tuple[float, float] = (0.0, 0.0)
    c: float = 0.0

    @classmethod
    def circle(cls, radius: float) -> "ShapeSpec":
        return cls(kind="circle", radius=float(radius))

    @classmethod
    def ellipse(cls, a: float, b: float) -> "ShapeSpec":
        return cls(kind="ellipse", a=float(a), b=float(b))

    @classmethod
    def joukowski(cls, circle_radius: float, center: Tuple[float, float], c: float) -> "ShapeSpec":
        return cls(
            kind="joukowski",
            circle_radius=float(circle_radius),
            center=(float(center[0]), float(center[1])),
            c=float(c),
        )


def _frozen(arr: np.ndarray) -> FloatArray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class BodyBoundary:
    nodes: FloatArray
    midpoints: FloatArray
    normals: FloatArray
    tangents: FloatArray
    lengths: FloatArray
    area: float
    centroid: FloatArray
    conformal_center_offset: FloatArray
    shape: Optional[ShapeSpec] = field(default=None, compare=False)

    @property
    def n_panels(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def perimeter(self) -> float:
        return float(self.lengths.sum())

    @property
    def diameter(self) -> float:
        d = self.nodes[:, None, :] - self.nodes[None, :, :]
        return float(np.sqrt(np.max(np.sum(d * d, axis=2))))

    @property
    def panel_ends(self) -> Tuple[FloatArray, FloatArray]:
        return self.nodes, np.roll(self.nodes, -1, axis=0)


@dataclass(frozen=True)
class RigidMass:
    m: float
    inertia: float
    matrix: FloatArray


# ---------- polygon helpers ----------


def _cross_terms(nodes: FloatArray) -> Tuple[FloatArray, FloatArray, FloatArray, FloatArray, FloatArray]:
    x, y = nodes[:, 0], nodes[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return x, y, xn, yn, x * yn - xn * y


def polygon_area(nodes: FloatArray) -> float:
    """Signed shoelace area; positive for counterclockwise ordering."""
    *_, cross = _cross_terms(np.asarray(nodes, dtype=np.float64))
    return 0.5 * float(cross.sum())


def polygon_centroid(nodes: FloatArray) -> FloatArray:
    x, y, xn, yn, cross = _cross_terms(np.asarray(nodes, dtype=np.float64))
    a = 0.5 * cross.sum()
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def _segments_intersect(nodes: FloatArray, chunk: int = 256) -> bool:
    """True when two non-adjacent edges of the closed polygon cross or touch."""
    n = nodes.shape[0]
    p = nodes
    q = np.roll(nodes, -1, axis=0)
    idx = np.arange(n)

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    for start in range(0, n, chunk):
        rows = idx[start:start + chunk]
        pi, qi = p[rows][:, None, :], q[rows][:, None, :]
        pj, qj = p[None, :, :], q[None, :, :]

        d1 = orient(pi, qi, pj)
        d2 = orient(pi, qi, qj)
        d3 = orient(pj, qj, pi)
        d4 = orient(pj, qj, qi)
        crossing = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)

        gap = np.abs(rows[:, None] - idx[None, :])
        adjacent = (gap <= 1) | (gap == n - 1)
        if np.any(crossing & ~adjacent):
            return True
    return False


# ---------- construction ----------


def body_from_nodes(nodes, *, shape: Optional[ShapeSpec] = None,
                    conformal_center: Tuple[float, float] = (0.0, 0.0),
                    min_panels: int = MIN_PANELS) -> BodyBoundary:
    """
    Build and validate a body from a closed node list. Clockwise input is reversed.
    `conformal_center` is where the conformal center sits in the given node coordinates;
    the returned body is translated so that it lands on the origin.
    """
    pts = np.array(nodes, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError("nodes must have shape (N, 2)")
    n = pts.shape[0]
    if n < max(3, int(min_panels)):
        raise GeometryError(f"too few panels: N={n}, need at least {max(3, int(min_panels))}")
    if not np.isfinite(pts).all():
        raise GeometryError("nodes contain non-finite values")

    pts = pts - np.asarray(conformal_center, dtype=np.float64)

    area = polygon_area(pts)
    scale = float(np.max(np.abs(pts))) or 1.0
    if abs(area) <= 1e-14 * scale * scale:
        raise GeometryError(f"degenerate shape: zero enclosed area ({area:.3e})")
    if area < 0.0:
        pts = pts[::-1].copy()
        area = -area

    nxt = np.roll(pts, -1, axis=0)
    seg = nxt - pts
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    if np.any(lengths <= 0.0):
        raise GeometryError("degenerate shape: repeated consecutive nodes")
    if _segments_intersect(pts):
        raise GeometryError("degenerate shape: contour is self-intersecting")

    tangents = seg / lengths[:, None]
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])

    body = BodyBoundary(
        nodes=_frozen(pts),
        midpoints=_frozen(0.5 * (pts + nxt)),
        normals=_frozen(normals),
        tangents=_frozen(tangents),
        lengths=_frozen(lengths),
        area=float(area),
        centroid=_frozen(polygon_centroid(pts)),
        conformal_center_offset=_frozen(np.zeros(2)),
        shape=shape,
    )
    log.debug("body N=%d area=%.6g perimeter=%.6g", n, body.area, body.perimeter)
    return body


def joukowski_conformal_center(shape: ShapeSpec) -> Tuple[float, float]:
    # z = r w + z0 + c^2 / (z0 + r w): the Laurent constant term at w -> infinity is z0
    return shape.center


def _check_joukowski(shape: ShapeSpec) -> None:
    r, c = shape.circle_radius, shape.c
    z0 = complex(*shape.center)
    if r <= 0.0 or c <= 0.0:
        raise GeometryError("joukowski parameters must be positive (circle_radius, c)")
    d_te = abs(z0 - c)
    d_le = abs(z0 + c)
    tol = 1e-12 * r
    if max(d_te, d_le) > r + tol:
        raise GeometryError(
            f"joukowski circle (radius {r}, center {shape.center}) must enclose both critical points ±{c}"
        )
    if abs(d_te - r) <= tol and abs(d_le - r) <= tol:
        raise GeometryError("joukowski parameters give the zero-thickness (flat plate / arc) limit")
    if abs(d_te - r) <= tol or abs(d_le - r) <= tol:
        log.warning("joukowski circle passes through a critical point (cusped edge)")


def make_body(shape: ShapeSpec, n_panels: int, *, min_panels: int = MIN_PANELS) -> BodyBoundary:
    """
    Sample the body contour as the image of N uniformly spaced points on a circle.
    """
    n = int(n_panels)
    if n < int(min_panels):
        raise GeometryError(f"too few panels: N={n}, need at least {int(min_panels)}")

    t = 2.0 * np.pi * np.arange(n) / n
    center = (0.0, 0.0)

    if shape.kind == "circle":
        if shape.radius <= 0.0:
            raise GeometryError("circle radius must be positive")
        nodes = shape.radius * np.column_stack([np.cos(t), np.sin(t)])
    elif shape.kind == "ellipse":
        if shape.a <= 0.0 or shape.b <= 0.0:
            raise GeometryError("ellipse semi-axes must be positive")
        nodes = np.column_stack([shape.a * np.cos(t), shape.b * np.sin(t)])
    elif shape.kind == "joukowski":
        _check_joukowski(shape)
        w = complex(*shape.center) + shape.circle_radius * np.exp(1j * t)
        z = w + shape.c ** 2 / w
        nodes = np.column_stack([z.real, z.imag])
        center = joukowski_conformal_center(shape)
    else:
        raise GeometryError(f"unknown shape {shape.kind!r} (expected one of {', '.join(SHAPES)})")

    return body_from_nodes(nodes, shape=shape, conformal_center=center, min_panels=min_panels)


# ---------- mass ----------


def rigid_mass(body: BodyBoundary, density: float = DEFAULT_DENSITY) -> RigidMass:
    """
    m = rho * area and I = rho * integral of (X^2 + Y^2) over the polygon, from the exact
    Green's-theorem edge sums. M_b = diag(I, m, m).
    """
    x, y, xn, yn, cross = _cross_terms(body.nodes)
    ixx = (cross * (x * x + x * xn + xn * xn)).sum() / 12.0
    iyy = (cross * (y * y + y * yn + yn * yn)).sum() / 12.0

    rho = float(density)
    m = rho * body.area
    inertia = rho * float(ixx + iyy)
    return RigidMass(m=m, inertia=inertia, matrix=_frozen(np.diag([inertia, m, m])))


# ---------- queries / export ----------


def point_in_body(body: BodyBoundary, points) -> NDArray[np.bool_]:
    """Even-odd test against the body polygon for an (M, 2) array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    px, py = pts[:, 0][:, None], pts[:, 1][:, None]
    a, b = body.panel_ends
    xa, ya = a[:, 0][None, :], a[:, 1][None, :]
    xb, yb = b[:, 0][None, :], b[:, 1][None, :]

    straddle = (ya > py) != (yb > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = xa + (py - ya) * (xb - xa) / (yb - ya)
    hits = straddle & (px < x_cross)
    return (np.count_nonzero(hits, axis=1) % 2) == 1


def nodes_text(body: BodyBoundary, digits: int = 17) -> str:
    """Two-column node list, one "x y" pair per line."""
    return "".join(f"{x:.{digits}g} {y:.{digits}g}\n" for x, y in body.nodes)

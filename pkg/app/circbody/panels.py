"""
Constant-strength source panels: potential and velocity influence of every panel of a body
at arbitrary points, and the collocation matrices at the panel midpoints.

Panel j runs from node j to node j+1 with unit tangent t. Local coordinates of a target are
xi along t (from the panel start) and eta along the left normal (-t_y, t_x); for a
counterclockwise body the fluid lies at eta < 0.

The nodes are taken to sample a smooth contour. The normal self term carries the curvature
that the flat panels leave out, which keeps the boundary potentials second order in the
panel size.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .geometry import BodyBoundary, FloatArray

log = logging.getLogger("circbody.panels")

_INV_2PI = 0.5 / np.pi
_TINY = 1e-300
# normal self-induction lost per radian of turning when a smooth contour is replaced by chords
_CHORD_DEFECT = np.log(2.0) * _INV_2PI


def _local_coords(body: BodyBoundary, points: FloatArray) -> Tuple[FloatArray, FloatArray]:
    start, _ = body.panel_ends
    t = body.tangents
    rel = points[:, None, :] - start[None, :, :]
    xi = rel[..., 0] * t[None, :, 0] + rel[..., 1] * t[None, :, 1]
    eta = -rel[..., 0] * t[None, :, 1] + rel[..., 1] * t[None, :, 0]
    return xi, eta


def source_influence(body: BodyBoundary, points) -> Tuple[FloatArray, FloatArray]:
    """
    Unit-strength panel influence at (M, 2) points.

    Returns (phi, vel): phi[m, j] is (1/2pi) times the integral of ln|x - y| over panel j,
    vel[m, j] the gradient of that potential in body coordinates, shape (M, N, 2).
    Targets on a panel itself are not special-cased here.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    xi, eta = _local_coords(body, pts)
    d = body.lengths[None, :]

    r1 = np.maximum(np.hypot(xi, eta), _TINY)
    r2 = np.maximum(np.hypot(xi - d, eta), _TINY)
    th1 = np.arctan2(eta, xi)
    th2 = np.arctan2(eta, xi - d)
    lr1, lr2 = np.log(r1), np.log(r2)

    phi = _INV_2PI * (xi * lr1 - (xi - d) * lr2 - d + eta * (th2 - th1))

    # panel-aligned components
    u = _INV_2PI * (lr1 - lr2)
    w = _INV_2PI * (th2 - th1)

    t = body.tangents[None, :, :]
    left = np.stack([-body.tangents[:, 1], body.tangents[:, 0]], axis=1)[None, :, :]
    vel = u[..., None] * t + w[..., None] * left
    return phi, vel


@dataclass(frozen=True)
class PanelSystem:
    """Influence matrices at the collocation points (panel midpoints), outside limit."""
    body: BodyBoundary
    normal: FloatArray
    potential: FloatArray


def panel_turning(body: BodyBoundary) -> FloatArray:
    """Tangent turning angle attributed to each panel: half of the turn at either end node."""
    t = body.tangents
    prev = np.roll(t, 1, axis=0)
    at_node = np.arctan2(prev[:, 0] * t[:, 1] - prev[:, 1] * t[:, 0], np.sum(prev * t, axis=1))
    return 0.5 * (at_node + np.roll(at_node, -1))


def build_panel_system(body: BodyBoundary) -> PanelSystem:
    phi, vel = source_influence(body, body.midpoints)

    normal = np.einsum("ijk,ik->ij", vel, body.normals)

    # own panel: jump 1/2 in the outward normal plus the curvature the chords leave out,
    # and the exact integral of ln|x - y| over the panel
    d = body.lengths
    idx = np.arange(body.n_panels)
    normal[idx, idx] = 0.5 + _CHORD_DEFECT * panel_turning(body)
    phi[idx, idx] = _INV_2PI * d * (np.log(0.5 * d) - 1.0)

    log.debug("assembled %dx%d influence matrices", body.n_panels, body.n_panels)
    return PanelSystem(body=body, normal=normal, potential=phi)

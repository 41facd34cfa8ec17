"""
Normalization report comparing the two modes: the Casimir coefficient, the algebra cocycle scale
and the B_Gamma-potential scale, each with the residual of its defining condition per mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from . import algebra

E_X = (0.0, 1.0, 0.0)
E_Y = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Finding:
    name: str
    paper: float
    verified: float
    paper_residual: float
    verified_residual: float

    @property
    def ratio(self) -> float:
        return self.paper / self.verified if self.verified != 0.0 else float("inf")

    def line(self) -> str:
        return (
            f"{self.name}: paper={self.paper:.17g} verified={self.verified:.17g} "
            f"ratio={self.ratio:.17g} residual(paper)={self.paper_residual:.3e} "
            f"residual(verified)={self.verified_residual:.3e}"
        )


@dataclass(frozen=True)
class NormalizationReport:
    findings: Tuple[Finding, ...]
    cocycle_from_group: float

    def text(self) -> str:
        lines = ["normalization report"]
        lines.extend("  " + f.line() for f in self.findings)
        lines.append(f"  C(e_x, e_y) from differentiating B: {self.cocycle_from_group:.12g}")
        return "\n".join(lines) + "\n"


def _random_gamma(rng: np.random.Generator) -> float:
    return float(rng.uniform(0.5, 3.0)) * (1.0 if rng.random() < 0.5 else -1.0)


def casimir_annihilation_residual(mode: str, rng: np.random.Generator, n: int = 100) -> float:
    """max |{Phi, f}| for f in (Pi, Px, Py) under the magnetic structure."""
    c = algebra.constants(mode).casimir_c
    worst = 0.0
    for _ in range(n):
        gam = _random_gamma(rng)
        x = rng.standard_normal(3)
        lam = algebra.structure_matrix("se2_magnetic", x, gamma=gam)
        grad = np.array([1.0, 2.0 * c * x[1] / gam, 2.0 * c * x[2] / gam])
        worst = max(worst, float(np.max(np.abs(grad @ lam))))
    return worst


def restriction_residual(mode: str, rng: np.random.Generator, n: int = 100) -> float:
    """max over coordinate pairs of |{x_i, x_j}_osc(pi, p=Gamma) - {x_i, x_j}_Gamma(pi)|."""
    worst = 0.0
    for _ in range(n):
        gam = _random_gamma(rng)
        x = rng.standard_normal(3)
        osc = algebra.structure_matrix("osc", np.append(x, gam), cocycle_mode=mode)[:3, :3]
        mag = algebra.structure_matrix("se2_magnetic", x, gamma=gam)
        worst = max(worst, float(np.max(np.abs(osc - mag))))
    return worst


def bg_potential_worst(mode: str, rng: np.random.Generator, n: int = 100) -> float:
    worst = 0.0
    for _ in range(n):
        g = algebra.random_element(rng)
        zeta = rng.standard_normal(3)
        worst = max(worst, algebra.bg_potential_residual(g, zeta, _random_gamma(rng), mode))
    return worst


def affine_casimir_drift(mode: str, rng: np.random.Generator, n: int = 1000) -> float:
    """Relative change of casimir_magnetic(mode) under the affine action built on psi(mode)."""
    worst = 0.0
    for _ in range(n):
        gam = _random_gamma(rng)
        g = algebra.random_element(rng)
        m = rng.standard_normal(3)
        before = algebra.casimir_magnetic(m, gam, mode)
        after = algebra.casimir_magnetic(algebra.affine_action(g, m, gam, mode), gam, mode)
        worst = max(worst, abs(after - before) / max(1.0, abs(before)))
    return worst


def build_report(seed: int = 0) -> NormalizationReport:
    rng = np.random.default_rng(seed)
    paper, verified = algebra.constants("paper"), algebra.constants("verified")

    findings: List[Finding] = [
        Finding(
            "casimir coefficient c in Pi + c|P|^2/Gamma",
            paper.casimir_c, verified.casimir_c,
            casimir_annihilation_residual("paper", rng), casimir_annihilation_residual("verified", rng),
        ),
        Finding(
            "cocycle scale C(e_x, e_y)",
            algebra.algebra_cocycle_C(E_X, E_Y, "paper"), algebra.algebra_cocycle_C(E_X, E_Y, "verified"),
            restriction_residual("paper", rng), restriction_residual("verified", rng),
        ),
        Finding(
            "psi scale c_Omega",
            paper.psi_c_omega, verified.psi_c_omega,
            bg_potential_worst("paper", rng), bg_potential_worst("verified", rng),
        ),
        Finding(
            "psi scale c_V",
            paper.psi_c_v, verified.psi_c_v,
            bg_potential_worst("paper", rng), bg_potential_worst("verified", rng),
        ),
    ]
    return NormalizationReport(tuple(findings), algebra.algebra_cocycle_from_group(E_X, E_Y))


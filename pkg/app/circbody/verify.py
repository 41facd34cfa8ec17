"""
Verification suite behind `circbody verify`.

Binding checks decide the exit code; checks in paper mode are informational and only reported.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from . import algebra, normalization
from .algebra import QuadraticField
from .geometry import ShapeSpec, make_body
from .potential import added_mass, curvature_gamma

log = logging.getLogger("circbody.verify")

StructureFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tol: float
    binding: bool = True
    detail: str = ""

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self) -> str:
        if self.ok:
            tag = "PASS"
        else:
            tag = "FAIL" if self.binding else "MISMATCH"
        extra = f"  {self.detail}" if self.detail else ""
        return f"[{tag}] {self.name}: residual={self.residual:.3e} tol={self.tol:.1e}{extra}"


@dataclass(frozen=True)
class VerifyReport:
    checks: Tuple[CheckResult, ...]
    normalization: normalization.NormalizationReport

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks if c.binding)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.binding and not c.ok]

    def text(self) -> str:
        lines = ["verification report"]
        lines.extend("  " + c.line() for c in self.checks)
        body = "\n".join(lines) + "\n" + self.normalization.text()
        n_bind = sum(1 for c in self.checks if c.binding)
        status = "OK" if self.ok else "FAILED: " + ", ".join(c.name for c in self.failures)
        return body + f"{n_bind - len(self.failures)}/{n_bind} binding checks passed; {status}\n"


def structure_for(space: str) -> Tuple[StructureFn, int]:
    """Structure matrix used by the Jacobi checks, as (point -> matrix, dim)."""
    gamma = 1.7 if space == "se2_magnetic" else 0.0
    ps = algebra.poisson_structure(space, gamma=gamma)
    return ps.matrix, ps.dim


# ---------- group / algebra checks ----------


def _group_checks(rng: np.random.Generator, n: int) -> List[CheckResult]:
    exp_worst = inv_worst = pair_worst = br_ad = br_mat = coc = 0.0
    for _ in range(n):
        g, h, k = (algebra.random_element(rng) for _ in range(3))
        zeta, zeta2 = rng.standard_normal(3), rng.standard_normal(3)
        m = rng.standard_normal(3)
        s, t = rng.uniform(-2, 2, 2)

        lhs = algebra.exp(zeta, s + t)
        rhs = algebra.compose(algebra.exp(zeta, s), algebra.exp(zeta, t))
        exp_worst = max(exp_worst, float(np.max(np.abs(lhs.matrix() - rhs.matrix()))))

        e = algebra.compose(g, algebra.inverse(g)).matrix()
        inv_worst = max(inv_worst, float(np.max(np.abs(e - np.eye(3)))))

        lhs_p = algebra.pairing(algebra.coad_action(g, m), algebra.ad_action(algebra.inverse(g), zeta))
        pair_worst = max(pair_worst, abs(lhs_p - algebra.pairing(m, zeta)))

        closed = np.asarray(algebra.lie_bracket_se2(zeta, zeta2))
        br_ad = max(br_ad, float(np.max(np.abs(closed - np.asarray(algebra.bracket_from_adjoint(zeta, zeta2))))))
        br_mat = max(br_mat, float(np.max(np.abs(closed - np.asarray(algebra.bracket_from_matrices(zeta, zeta2))))))

        coc = max(coc, algebra.cocycle_identity_residual(g, h, k))

    return [
        CheckResult("exp(s+t) = exp(s) exp(t)", exp_worst, 1e-12),
        CheckResult("g g^-1 = e", inv_worst, 1e-14),
        CheckResult("coadjoint pairing invariance", pair_worst, 1e-12),
        CheckResult("se(2) bracket vs Ad derivative", br_ad, 1e-7),
        CheckResult("se(2) bracket vs matrix commutator", br_mat, 1e-14),
        CheckResult("group cocycle identity of B", coc, 1e-12),
    ]


def _jacobi_checks(rng: np.random.Generator, n: int) -> List[CheckResult]:
    out = []
    for space in algebra.SPACES:
        fn, dim = structure_for(space)
        worst = anti = 0.0
        for _ in range(n):
            x = rng.standard_normal(dim)
            fields = [QuadraticField.random(rng, dim) for _ in range(3)]
            worst = max(worst, algebra.jacobi_residual((fn, dim), x, fields))
            lam = fn(x)
            anti = max(anti, float(np.max(np.abs(lam + lam.T))))
        out.append(CheckResult(f"jacobi {space}", worst, 1e-12))
        out.append(CheckResult(f"antisymmetry {space}", anti, 0.0))
    return out


def _mode_checks(rng: np.random.Generator, n: int) -> List[CheckResult]:
    out: List[CheckResult] = []
    for mode in algebra.MODES:
        binding = mode == "verified"
        out.append(CheckResult(
            f"osc restriction is Poisson ({mode})",
            normalization.restriction_residual(mode, rng, n), 0.0, binding,
        ))
        out.append(CheckResult(
            f"casimir annihilation ({mode})",
            normalization.casimir_annihilation_residual(mode, rng, n), 1e-12, binding,
        ))
        out.append(CheckResult(
            f"B_Gamma-potential defining identity ({mode})",
            normalization.bg_potential_worst(mode, rng, n), 1e-6, binding,
        ))
        out.append(CheckResult(
            f"affine action preserves casimir ({mode})",
            normalization.affine_casimir_drift(mode, rng, 1000), 1e-12, binding,
        ))

        cocycle = action = 0.0
        for _ in range(n):
            gam = float(rng.uniform(0.5, 3.0))
            g, h = algebra.random_element(rng), algebra.random_element(rng)
            m = rng.standard_normal(3)
            cocycle = max(cocycle, algebra.onecocycle_residual(g, h, gam, mode))
            lhs = np.asarray(algebra.affine_action(g, algebra.affine_action(h, m, gam, mode), gam, mode))
            rhs = np.asarray(algebra.affine_action(algebra.compose(g, h), m, gam, mode))
            action = max(action, float(np.max(np.abs(lhs - rhs))))
        out.append(CheckResult(f"psi one-cocycle identity ({mode})", cocycle, 1e-12, binding))
        out.append(CheckResult(f"affine action property ({mode})", action, 1e-12, binding))

    worst = 0.0
    for _ in range(n):
        g = algebra.random_element(rng)
        gam = float(rng.uniform(-3.0, 3.0))
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        worst = max(worst, abs(algebra.magnetic_form(g, gam, v, w) - gam * (v[1] * w[2] - v[2] * w[1])))
    out.append(CheckResult("left-invariant B_Gamma equals Gamma dx^dy", worst, 1e-12))
    return out


# ---------- fluid checks ----------


def _fluid_checks() -> List[CheckResult]:
    out = []
    circle = make_body(ShapeSpec.circle(1.0), 256)
    mf = added_mass(circle).M_f
    err = float(np.max(np.abs(mf - np.diag([0.0, np.pi, np.pi])))) / np.pi
    out.append(CheckResult("added mass circle N=256", err, 1e-2, detail=f"diag={np.diag(mf).round(6).tolist()}"))

    ellipse = make_body(ShapeSpec.ellipse(2.0, 1.0), 256)
    mf = added_mass(ellipse).M_f
    ref = np.array([9.0 * np.pi / 8.0, np.pi, 4.0 * np.pi])
    err = float(np.max(np.abs(np.diag(mf) - ref) / ref))
    out.append(CheckResult("added mass ellipse a=2 b=1 N=256", err, 2e-2, detail=f"diag={np.diag(mf).round(6).tolist()}"))

    big = make_body(ShapeSpec.circle(1.0), 512)
    value = curvature_gamma(big, 1.0, (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    out.append(CheckResult("curvature circle Gamma=1 (e_x, e_y)", abs(value - 1.0), 1e-3, detail=f"value={value:.12g}"))
    return out


def run_verify(seed: int = 0, n: int = 100, *, include_fluid: bool = True) -> VerifyReport:
    rng = np.random.default_rng(seed)
    checks: List[CheckResult] = []
    checks.extend(_group_checks(rng, n))
    checks.extend(_jacobi_checks(rng, n))
    checks.extend(_mode_checks(rng, n))
    if include_fluid:
        checks.extend(_fluid_checks())

    report = VerifyReport(tuple(checks), normalization.build_report(seed))
    for c in report.failures:
        log.error("check failed: %s", c.line())
    return report

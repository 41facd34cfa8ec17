import numpy as np
import pytest
import scipy.linalg

from circbody import algebra
from circbody.algebra import OscElement, QuadraticField, Se2Element
from circbody.errors import DimensionError, SingularCirculationError
from circbody.normalization import build_report

E_X = (0.0, 1.0, 0.0)
E_Y = (0.0, 0.0, 1.0)


def _close(g: Se2Element, h: Se2Element, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(g.matrix() - h.matrix())) < tol)


def test_group_law(rng):
    for _ in range(50):
        g, h, k = (algebra.random_element(rng) for _ in range(3))
        assert _close(algebra.compose(algebra.compose(g, h), k), algebra.compose(g, algebra.compose(h, k)))
        assert _close(algebra.compose(g, algebra.inverse(g)), algebra.identity(), 1e-14)
        np.testing.assert_allclose(algebra.compose(g, h).matrix(), g.matrix() @ h.matrix(), atol=1e-12)
        assert _close(Se2Element.from_matrix(g.matrix()), g, 1e-14)


def test_exp_one_parameter_subgroup(rng):
    for _ in range(50):
        zeta = rng.standard_normal(3)
        s, t = rng.uniform(-2.0, 2.0, 2)
        assert _close(algebra.exp(zeta, s + t), algebra.compose(algebra.exp(zeta, s), algebra.exp(zeta, t)))


def test_exp_small_angle_series():
    phi = 0.99e-4
    a, b = np.sin(phi) / phi, (1.0 - np.cos(phi)) / phi
    g = algebra.exp((phi, 1.0, 0.5))
    np.testing.assert_allclose(g.x0, [a - 0.5 * b, b + 0.5 * a], atol=1e-10)
    assert algebra.exp((0.0, 1.0, 2.0)).x0.tolist() == [1.0, 2.0]


def test_exp_matches_matrix_exponential():
    zeta = (0.7, -1.2, 0.4)
    np.testing.assert_allclose(algebra.exp(zeta).matrix(), scipy.linalg.expm(algebra.hat(zeta)), atol=1e-13)


def test_bracket_three_ways(rng):
    for _ in range(50):
        z1, z2 = rng.standard_normal(3), rng.standard_normal(3)
        closed = np.asarray(algebra.lie_bracket_se2(z1, z2))
        np.testing.assert_allclose(np.asarray(algebra.bracket_from_matrices(z1, z2)), closed, atol=1e-14)
        np.testing.assert_allclose(np.asarray(algebra.bracket_from_adjoint(z1, z2)), closed, atol=1e-7)


def test_bracket_of_translations_vanishes():
    assert np.asarray(algebra.lie_bracket_se2(E_X, E_Y)).tolist() == [0.0, 0.0, 0.0]
    # [e_Omega, e_x] = -J e_x = e_y
    np.testing.assert_allclose(np.asarray(algebra.lie_bracket_se2((1.0, 0.0, 0.0), E_X)), E_Y, atol=0)


def test_coadjoint_pairing_invariance(rng):
    for _ in range(50):
        g = algebra.random_element(rng)
        m, zeta = rng.standard_normal(3), rng.standard_normal(3)
        lhs = algebra.pairing(algebra.coad_action(g, m), algebra.ad_action(algebra.inverse(g), zeta))
        assert lhs == pytest.approx(algebra.pairing(m, zeta), abs=1e-12)
        back = algebra.ad_action(algebra.inverse(g), algebra.ad_action(g, zeta))
        np.testing.assert_allclose(np.asarray(back), zeta, atol=1e-12)


def test_group_cocycle_identity(rng):
    for _ in range(50):
        g, h, k = (algebra.random_element(rng) for _ in range(3))
        assert algebra.cocycle_identity_residual(g, h, k) < 1e-12


def test_oscillator_group(rng):
    for _ in range(20):
        a, b, c = (OscElement(algebra.random_element(rng), float(rng.standard_normal())) for _ in range(3))
        left = algebra.osc_compose(algebra.osc_compose(a, b), c)
        right = algebra.osc_compose(a, algebra.osc_compose(b, c))
        assert _close(left.g, right.g)
        assert left.a == pytest.approx(right.a, abs=1e-12)

        unit = algebra.osc_compose(a, algebra.osc_inverse(a))
        assert _close(unit.g, algebra.identity(), 1e-14)
        assert unit.a == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("space, gamma", [("se2", 0.0), ("se2_magnetic", 1.7), ("osc", 0.0)])
def test_jacobi_identity(space, gamma, rng):
    ps = algebra.poisson_structure(space, gamma=gamma)
    for _ in range(100):
        x = rng.standard_normal(ps.dim)
        fields = [QuadraticField.random(rng, ps.dim) for _ in range(3)]
        assert algebra.jacobi_residual(ps, x, fields) < 1e-12
        lam = ps.matrix(x)
        np.testing.assert_array_equal(lam, -lam.T)


def test_jacobi_detects_a_broken_structure(rng):
    def broken(x):
        return np.array([[0.0, x[2], 0.0], [-x[2], 0.0, x[1]], [0.0, -x[1], 0.0]])

    worst = max(
        algebra.jacobi_residual((broken, 3), rng.standard_normal(3),
                                [QuadraticField.random(rng, 3) for _ in range(3)])
        for _ in range(20)
    )
    assert worst > 1e-6


def test_coordinate_brackets():
    x = np.array([0.3, -1.1, 0.8])
    f = [QuadraticField.coordinate(k, 3) for k in range(3)]
    assert algebra.bracket_eval("se2", f[0], f[1], x) == pytest.approx(-x[2])
    assert algebra.bracket_eval("se2", f[0], f[2], x) == pytest.approx(x[1])
    assert algebra.bracket_eval("se2_magnetic", f[1], f[2], x, gamma=2.0) == pytest.approx(-2.0)


def test_structure_dimension_is_checked():
    with pytest.raises(DimensionError):
        algebra.structure_matrix("osc", [1.0, 2.0, 3.0])
    with pytest.raises(DimensionError):
        algebra.poisson_structure("so3")


def test_verified_constants():
    k = algebra.constants("verified")
    assert k.casimir_c == pytest.approx(0.5, abs=1e-14)
    assert k.cocycle_scale == 1.0
    assert k.psi_c_omega == pytest.approx(0.5, abs=1e-12)
    assert k.psi_c_v == pytest.approx(1.0, abs=1e-12)
    assert all(r < 1e-12 for r in k.residuals.values())


def test_osc_restriction_is_exact(rng):
    for _ in range(100):
        gamma = float(rng.uniform(-3.0, 3.0))
        x = rng.standard_normal(3)
        osc = algebra.structure_matrix("osc", np.append(x, gamma))[:3, :3]
        np.testing.assert_array_equal(osc, algebra.structure_matrix("se2_magnetic", x, gamma=gamma))
        paper = algebra.structure_matrix("osc", np.append(x, gamma), cocycle_mode="paper")[:3, :3]
        assert paper[1, 2] == pytest.approx(-2.0 * gamma)


def test_cocycle_from_group_carries_factor_two():
    assert algebra.algebra_cocycle_from_group(E_X, E_Y) == pytest.approx(2.0, abs=1e-6)
    assert algebra.algebra_cocycle_C(E_X, E_Y, "verified") == 1.0
    assert algebra.algebra_cocycle_C(E_X, E_Y, "paper") == 2.0


def test_casimir_commutes_with_coordinates(rng):
    for mode, expect_zero in (("verified", True), ("paper", False)):
        c = algebra.constants(mode).casimir_c
        worst = 0.0
        for _ in range(20):
            gamma, x = 1.3, rng.standard_normal(3)
            lam = algebra.structure_matrix("se2_magnetic", x, gamma=gamma)
            grad = np.array([1.0, 2.0 * c * x[1] / gamma, 2.0 * c * x[2] / gamma])
            worst = max(worst, float(np.max(np.abs(grad @ lam))))
        assert (worst < 1e-12) == expect_zero


def test_casimir_needs_circulation():
    with pytest.raises(SingularCirculationError):
        algebra.casimir_magnetic((1.0, 0.0, 0.0), 0.0)
    assert algebra.kirchhoff_casimir((5.0, 3.0, 4.0)) == 25.0


def test_bg_potential_defining_identity(rng):
    verified, paper = 0.0, 0.0
    for _ in range(100):
        g, zeta, gamma = algebra.random_element(rng), rng.standard_normal(3), float(rng.uniform(0.5, 3.0))
        verified = max(verified, algebra.bg_potential_residual(g, zeta, gamma, "verified"))
        paper = max(paper, algebra.bg_potential_residual(g, zeta, gamma, "paper"))
    assert verified < 1e-6
    assert paper > 1e-3


def test_magnetic_form_is_translation_area(rng):
    for _ in range(20):
        g = algebra.random_element(rng)
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        assert algebra.magnetic_form(g, 2.5, v, w) == pytest.approx(2.5 * (v[1] * w[2] - v[2] * w[1]), abs=1e-12)


@pytest.mark.parametrize("mode", algebra.MODES)
def test_affine_action(mode, rng):
    for _ in range(100):
        gamma = float(rng.uniform(0.5, 3.0)) * (1 if rng.random() < 0.5 else -1)
        g, h = algebra.random_element(rng), algebra.random_element(rng)
        m = rng.standard_normal(3)
        assert algebra.onecocycle_residual(g, h, gamma, mode) < 1e-12
        lhs = algebra.affine_action(g, algebra.affine_action(h, m, gamma, mode), gamma, mode)
        rhs = algebra.affine_action(algebra.compose(g, h), m, gamma, mode)
        np.testing.assert_allclose(np.asarray(lhs), np.asarray(rhs), atol=1e-12)


def test_affine_action_preserves_verified_casimir(rng):
    for _ in range(1000):
        gamma = float(rng.uniform(0.5, 3.0)) * (1 if rng.random() < 0.5 else -1)
        g, m = algebra.random_element(rng), rng.standard_normal(3)
        before = algebra.casimir_magnetic(m, gamma)
        after = algebra.casimir_magnetic(algebra.affine_action(g, m, gamma), gamma)
        assert abs(after - before) <= 1e-12 * max(1.0, abs(before))


def test_paper_mode_examples():
    assert algebra.casimir_magnetic((0.0, 1.0, 0.0), 2.0, "paper") == pytest.approx(0.5)
    assert algebra.casimir_magnetic((0.0, 1.0, 0.0), 2.0, "verified") == pytest.approx(0.25)
    for mode in algebra.MODES:
        assert algebra.casimir_magnetic((1.0, 0.0, 0.0), 1.0, mode) == 1.0

    for theta in (0.0, 0.7, -2.5):
        psi = algebra.bg_potential(Se2Element(theta, 1.0, 0.0), 4.0, "paper")
        np.testing.assert_allclose(np.asarray(psi), [-1.0, 0.0, -2.0], atol=1e-15)
    np.testing.assert_array_equal(np.asarray(algebra.bg_potential(algebra.identity(), 4.0, "paper")), 0.0)

    moved = algebra.affine_action(Se2Element(0.0, 1.0, 0.0), (0.0, 0.0, 0.0), 4.0, "paper")
    np.testing.assert_allclose(np.asarray(moved), [-1.0, 0.0, -2.0], atol=1e-15)
    same = algebra.affine_action(algebra.identity(), (0.3, -1.2, 2.0), 4.0, "paper")
    np.testing.assert_allclose(np.asarray(same), [0.3, -1.2, 2.0], atol=1e-15)


def test_normalization_report_ratios():
    report = build_report(seed=3)
    ratios = {f.name: f.ratio for f in report.findings}
    assert len(ratios) == 4
    assert all(np.isfinite(r) for r in ratios.values())
    assert ratios["casimir coefficient c in Pi + c|P|^2/Gamma"] == pytest.approx(2.0)
    assert ratios["cocycle scale C(e_x, e_y)"] == pytest.approx(2.0)
    assert ratios["psi scale c_Omega"] == pytest.approx(0.5)
    assert "ratio=" in report.text()
    assert build_report(seed=3).text() == report.text()

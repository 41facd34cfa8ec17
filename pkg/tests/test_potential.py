import numpy as np
import pytest

from circbody.errors import InsideBodyError, MassModelError, NeumannError
from circbody.geometry import ShapeSpec, make_body
from circbody.panels import build_panel_system, panel_turning
from circbody.potential import (
    added_mass,
    boundary_moments,
    circulatory_flow,
    combine,
    contour_derivative,
    curvature_gamma,
    kinetic_energy_fluid,
    kirchhoff_data,
    kirchhoff_potentials,
    make_mass_model,
    solve_neumann,
    velocity_field,
    vortex_velocity,
)


def _closed_form_curvature(gamma, z1, z2):
    u1, u2 = np.hypot(*z1[1:]), np.hypot(*z2[1:])
    a1, a2 = np.arctan2(z1[2], z1[1]), np.arctan2(z2[2], z2[1])
    return -gamma * u1 * u2 * np.sin(a1 - a2)


def test_panel_self_terms(circle_256):
    system = build_panel_system(circle_256)
    np.testing.assert_allclose(panel_turning(circle_256), 2.0 * np.pi / 256, rtol=1e-12)
    # 1/2 from the jump, ln(2)/(2 pi) per radian of turning from the chords
    np.testing.assert_allclose(np.diag(system.normal), 0.5 + np.log(2.0) / 256, rtol=1e-12)


def test_contour_derivative_of_a_linear_function(ellipse_256):
    body = ellipse_256
    slope = contour_derivative(body, body.midpoints @ np.array([0.3, -1.2]))
    np.testing.assert_allclose(slope, body.tangents @ np.array([0.3, -1.2]), atol=5e-3)
    assert abs(np.dot(slope, body.lengths)) < 1e-12


def test_added_mass_circle(circle_256):
    mf = added_mass(circle_256).M_f
    np.testing.assert_allclose(mf, np.diag([0.0, np.pi, np.pi]), atol=1e-2 * np.pi)
    np.testing.assert_array_equal(mf, mf.T)


def test_added_mass_circle_refined():
    mf = added_mass(make_body(ShapeSpec.circle(1.0), 512)).M_f
    np.testing.assert_allclose(mf, np.diag([0.0, np.pi, np.pi]), atol=3e-3 * np.pi)


def test_added_mass_converges_at_second_order():
    sizes = [64, 128, 256, 512]
    errors = [abs(added_mass(make_body(ShapeSpec.circle(1.0), n)).M_f[1, 1] - np.pi) for n in sizes]
    slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
    assert slope < -1.5


def test_circle_potentials(circle_256):
    body = circle_256
    phi_omega, phi_x, phi_y = (p.phi_boundary for p in kirchhoff_potentials(body))
    theta = np.arctan2(body.midpoints[:, 1], body.midpoints[:, 0])
    # trace of Phi_x = -x / r^2 on the unit circle
    np.testing.assert_allclose(phi_x, -np.cos(theta), atol=2e-3)
    assert np.max(np.abs(phi_omega)) < 1e-12
    # a quarter turn of the panel index rotates Phi_x into Phi_y
    np.testing.assert_allclose(phi_y, np.roll(phi_x, 256 // 4), atol=1e-10)


def test_ellipse_rotation_potential(ellipse_256):
    body = ellipse_256
    phi_omega = kirchhoff_potentials(body)[0].phi_boundary
    # elliptic coordinates: Phi_Omega = -(a^2 - b^2) / 4 sin(2 eta) on the boundary
    eta = np.arctan2(body.midpoints[:, 1] / 1.0, body.midpoints[:, 0] / 2.0)
    np.testing.assert_allclose(phi_omega, -0.75 * np.sin(2.0 * eta), atol=1e-2)
    assert np.max(np.abs(phi_omega)) > 0.7


def test_potentials_are_linear_in_zeta(ellipse_256, rng):
    pots = kirchhoff_potentials(ellipse_256)
    zeta = rng.standard_normal(3)
    direct = solve_neumann(ellipse_256, kirchhoff_data(ellipse_256) @ zeta)
    phi, sigma = combine(pots, zeta)
    np.testing.assert_allclose(direct.phi_boundary, phi, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(direct.source_strengths, sigma, rtol=1e-10, atol=1e-12)


def test_added_mass_ellipse(ellipse_256):
    mf = added_mass(ellipse_256).M_f
    np.testing.assert_allclose(np.diag(mf), [9.0 * np.pi / 8.0, np.pi, 4.0 * np.pi], rtol=2e-2)
    assert np.min(np.linalg.eigvalsh(mf)) > -1e-8


def test_added_mass_scales_with_density(ellipse_256):
    pots = kirchhoff_potentials(ellipse_256)
    m1 = added_mass(ellipse_256, 1.0, potentials=pots)
    m3 = added_mass(ellipse_256, 3.0, potentials=pots)
    np.testing.assert_allclose(m3.M_f, 3.0 * m1.M_f, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(m3.M_b, 3.0 * m1.M_b, rtol=1e-14)


def test_kinetic_energy_matches_boundary_integral(ellipse_256, rng):
    pots = kirchhoff_potentials(ellipse_256)
    mass = added_mass(ellipse_256, potentials=pots)
    for _ in range(5):
        zeta = rng.standard_normal(3)
        quad, boundary = kinetic_energy_fluid(ellipse_256, zeta, mass, pots)
        assert quad > 0.0
        assert boundary == pytest.approx(quad, rel=1e-10)


def test_neumann_rejects_net_flux(circle_256):
    with pytest.raises(NeumannError, match="net flux"):
        solve_neumann(circle_256, np.ones(circle_256.n_panels))
    with pytest.raises(NeumannError, match="expected 256"):
        solve_neumann(circle_256, np.zeros(10))


def test_neumann_boundary_values_have_zero_mean(circle_256):
    pots = kirchhoff_potentials(circle_256)
    for p in pots:
        assert abs(np.dot(p.phi_boundary, circle_256.lengths)) < 1e-12
        assert p.residual < 1e-10


def test_translating_circle_dipole(circle_256):
    # body moving with V = (1, 0): Phi = -x / r^2
    u = velocity_field(circle_256, (0.0, 1.0, 0.0), 0.0, [[2.0, 0.0], [0.0, 2.0], [1.5, 1.5]])
    x, y = np.array([2.0, 0.0, 1.5]), np.array([0.0, 2.0, 1.5])
    r4 = (x * x + y * y) ** 2
    exact = np.column_stack([(x * x - y * y) / r4, 2.0 * x * y / r4])
    np.testing.assert_allclose(u, exact, atol=5e-3)


def test_zero_motion_zero_field(circle_256):
    u = velocity_field(circle_256, (0.0, 0.0, 0.0), 0.0, [[2.0, 0.0], [-3.0, 1.0]])
    np.testing.assert_array_equal(u, 0.0)


def test_points_inside_are_rejected(circle_256):
    with pytest.raises(InsideBodyError) as info:
        velocity_field(circle_256, (0.0, 1.0, 0.0), 0.0, [[2.0, 0.0], [0.0, 0.0], [0.1, 0.2]])
    assert info.value.indices == [1, 2]


def test_circulation_around_circle(circle_256):
    gamma = 2.5
    flow = circulatory_flow(circle_256, gamma)
    # the polygon nodes lie on one circle, so the vortex already has no normal flux
    assert np.max(np.abs(flow.source_strengths)) < 1e-12
    np.testing.assert_allclose(flow.tangential_speed, gamma / (256 * circle_256.lengths), rtol=1e-10)

    total, mx, my = boundary_moments(flow)
    assert total == pytest.approx(gamma, rel=1e-12)
    assert abs(mx) < 1e-10 and abs(my) < 1e-10


def test_circulation_speed_in_the_field(circle_256):
    gamma = 1.0
    pts = np.array([[1.5, 0.0], [0.0, 2.0], [-2.0, -2.0], [3.0, 1.0]])
    u = velocity_field(circle_256, (0.0, 0.0, 0.0), gamma, pts)
    r = np.hypot(pts[:, 0], pts[:, 1])
    np.testing.assert_allclose(np.hypot(u[:, 0], u[:, 1]), gamma / (2.0 * np.pi * r), rtol=1e-3)
    # counterclockwise
    assert np.all(pts[:, 0] * u[:, 1] - pts[:, 1] * u[:, 0] > 0.0)


def test_circulatory_flow_has_no_normal_velocity(ellipse_256):
    flow = circulatory_flow(ellipse_256, 1.0)
    assert flow.normal_residual < 1e-10
    total, mx, my = boundary_moments(flow)
    assert total == pytest.approx(1.0, rel=1e-12)
    # point symmetry of the ellipse
    assert abs(mx) < 1e-10 and abs(my) < 1e-10


def test_foil_circulation_moments(foil_1024):
    gamma = 2.0
    total, mx, my = boundary_moments(circulatory_flow(foil_1024, gamma))
    assert total == pytest.approx(gamma, rel=1e-12)
    # the vortex sits at the conformal center
    assert abs(mx) < 1e-3 * gamma and abs(my) < 1e-3 * gamma


def test_boundary_normal_velocity_matches_body_motion(ellipse_256):
    body = ellipse_256
    zeta = np.array([0.4, 1.0, -0.5])
    pts = body.midpoints + 1e-3 * body.lengths[:, None] * body.normals
    u = velocity_field(body, zeta, 0.0, pts)
    expected = kirchhoff_data(body) @ zeta
    normal = np.einsum("ij,ij->i", u, body.normals)
    np.testing.assert_allclose(normal, expected, atol=5e-2 * np.max(np.abs(expected)))


def test_vortex_velocity_is_counterclockwise():
    np.testing.assert_allclose(vortex_velocity([[1.0, 0.0]], 2.0 * np.pi), [[0.0, 1.0]], atol=1e-15)


def test_curvature_circle():
    body = make_body(ShapeSpec.circle(1.0), 512)
    assert curvature_gamma(body, 1.0, (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("shape", [ShapeSpec.circle(1.0), ShapeSpec.ellipse(2.0, 1.0)])
def test_curvature_matches_closed_form(shape, rng):
    body = make_body(shape, 512)
    gamma = -1.7
    flow = circulatory_flow(body, gamma)
    for _ in range(20):
        z1, z2 = rng.standard_normal(3), rng.standard_normal(3)
        u1, u2 = np.hypot(*z1[1:]), np.hypot(*z2[1:])
        value = curvature_gamma(body, gamma, z1, z2, flow=flow)
        assert abs(value - _closed_form_curvature(gamma, z1, z2)) < 1e-3 * abs(gamma) * u1 * u2


def test_curvature_on_foil(foil_1024, rng):
    gamma = 2.0
    flow = circulatory_flow(foil_1024, gamma)
    for _ in range(20):
        z1, z2 = rng.standard_normal(3), rng.standard_normal(3)
        value = curvature_gamma(foil_1024, gamma, z1, z2, flow=flow)
        expected = _closed_form_curvature(gamma, z1, z2)
        assert abs(value - expected) < 1e-3 * abs(gamma) * np.linalg.norm(z1) * np.linalg.norm(z2)


def test_curvature_is_bilinear(ellipse_256, rng):
    flow = circulatory_flow(ellipse_256, 0.8)
    z1, z2, z3 = rng.standard_normal(3), rng.standard_normal(3), rng.standard_normal(3)
    a, b = 1.7, -0.4

    def value(x, y):
        return curvature_gamma(ellipse_256, 0.8, x, y, flow=flow)

    lhs = value(a * z1 + b * z3, z2)
    rhs = a * value(z1, z2) + b * value(z3, z2)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
    assert value(z1, z1) == 0.0


def test_curvature_is_antisymmetric(ellipse_256, rng):
    flow = circulatory_flow(ellipse_256, 1.3)
    for _ in range(5):
        z1, z2 = rng.standard_normal(3), rng.standard_normal(3)
        a = curvature_gamma(ellipse_256, 1.3, z1, z2, flow=flow)
        b = curvature_gamma(ellipse_256, 1.3, z2, z1, flow=flow)
        assert a == pytest.approx(-b, abs=1e-12)


def test_mass_model_must_be_positive_definite():
    with pytest.raises(MassModelError, match="positive definite"):
        make_mass_model(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(MassModelError, match="symmetric"):
        make_mass_model(np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))

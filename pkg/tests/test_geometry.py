import math

import numpy as np
import pytest

from cosserat_shell import geometry as geo
from cosserat_shell import linalg3 as la
from cosserat_shell import suites
from cosserat_shell.errors import Inadmissible, RankDeficient, UnknownSurface


def test_cylinder_curvatures_and_orientation():
    r = 1.3
    f = geo.frame_at(geo.builtin_surface("cylinder", (r,)), 0.2, 0.4)
    assert f.H == pytest.approx(-1 / (2 * r), abs=1e-14)
    assert f.K == pytest.approx(0.0, abs=1e-14)
    radial = np.array([f.y0[0], 0.0, f.y0[2]]) / r
    assert np.allclose(f.n0, radial, atol=1e-14)


def test_sphere_curvatures_and_orientation():
    R = 2.0
    f = geo.frame_at(geo.builtin_surface("sphere", (R,)), 1.0, 0.5)
    assert f.H == pytest.approx(-1 / R, abs=1e-14)
    assert f.K == pytest.approx(1 / R**2, abs=1e-14)
    assert np.allclose(f.n0, f.y0 / R, atol=1e-14)
    assert np.allclose(f.B, -f.A / R, atol=1e-14)


def test_plate_is_trivial():
    f = geo.frame_at(geo.builtin_surface("plate"), 0.3, 0.7)
    assert np.allclose(f.A, np.diag([1.0, 1, 0])) and not f.B.any()
    assert np.allclose(f.C, la.J2) and f.det0 == 1.0


def test_saddle_has_negative_gauss_curvature_at_origin():
    a, b = 1.0, 1.5
    f = geo.frame_at(geo.builtin_surface("hyperbolic_paraboloid", (a, b)), 0.0, 0.0)
    assert f.K == pytest.approx(-4 / (a**2 * b**2), rel=1e-14)
    assert f.H == pytest.approx(1 / a**2 - 1 / b**2, rel=1e-14)


def test_unknown_surface_and_degree_limit():
    with pytest.raises(UnknownSurface):
        geo.builtin_surface("torus")
    with pytest.raises(UnknownSurface):
        geo.builtin_surface("polynomial", coeffs=[(4, 3, 1.0)])


def test_rank_deficient_parametrization():
    # the sphere chart degenerates at its pole
    with pytest.raises(RankDeficient):
        geo.frame_at(geo.builtin_surface("sphere", domain=((0, 1), (0, 1))), 0.0, 0.3)


def test_identities_hold_in_both_modes(surface, rng):
    for mode_surface in (surface, geo.builtin_surface(surface.kind, surface.params, mode="fd", coeffs=surface.coeffs)):
        tol = 1e-9 if mode_surface.mode == "analytic" else 1e-6
        res = suites.geometry_suite(mode_surface, rng, n=8)
        assert res[0].max_residual < tol, res[0]
        assert res[1].max_residual < 1e-6, res[1]


def test_fd_frame_oracle_agrees_with_analytic(surface):
    x1, x2 = suites.sample_points(surface, 6, np.random.default_rng(1))
    fa = geo.frame_at(surface, x1, x2)
    fd = geo.fd_frame_oracle(surface, x1, x2)
    # second differences carry rounding of order 1e-16 / eps^2
    for name, tol in (("grad_y0", 1e-10), ("C", 1e-10), ("grad_n0", 1e-6), ("L", 1e-6), ("B", 1e-6)):
        assert np.abs(getattr(fa, name) - getattr(fd, name)).max() < tol, name


def test_fd_oracle_on_quadratic_graph_is_exact_to_rounding():
    s = geo.builtin_surface("polynomial", coeffs=[(2, 0, 0.7), (1, 1, -0.2), (0, 2, 0.4)])
    fa = geo.frame_at(s, 0.1, -0.2)
    fd = geo.fd_frame_oracle(s, 0.1, -0.2, eps=1e-2)
    assert np.abs(fa.L - fd.L).max() < 1e-10


def test_batched_frame_matches_pointwise():
    s = geo.builtin_surface("hyperbolic_paraboloid", (1.0, 1.5))
    X1, X2 = np.meshgrid(np.linspace(-0.4, 0.4, 5), np.linspace(-0.3, 0.3, 4), indexing="ij")
    fb = geo.frame_at(s, X1, X2)
    assert fb.batch_shape == (5, 4)
    fp = geo.frame_at(s, X1[2, 3], X2[2, 3])
    assert np.allclose(fb[2, 3].B, fp.B, atol=0) and fb[2, 3].K == fp.K


def test_theta_closed_forms(surface, params, rng):
    res = suites.theta_suite(surface, params, rng, n=200)
    assert all(r.max_residual < 1e-12 for r in res), res


def test_thickness_factor_is_determinant_ratio(surface, rng):
    x1, x2 = suites.sample_points(surface, 20, rng)
    f = geo.frame_at(surface, x1, x2)
    x3 = (rng.random(20) - 0.5) * 0.1
    grad, det, _ = geo.theta_kinematics(f, x3)
    assert np.allclose(det / f.det0, geo.thickness_factor(f, x3), rtol=1e-13)


def test_kirchhoff_constraint_and_director(surface, params, rng):
    assert suites.gkc_suite(surface, params, rng, n=20)[0].max_residual < 1e-12
    f = geo.frame_at(surface, *suites.sample_points(surface, 5, rng))
    assert np.allclose(f.Q0 @ np.array([0, 0, 1.0]), f.n0, atol=1e-12)


def test_admissibility():
    f = geo.frame_at(geo.builtin_surface("sphere", (1.0,)), 1.0, 0.5)
    assert geo.admissibility_check(f, 0.4)[0]
    assert not geo.admissibility_check(f, 0.6)[0]
    with pytest.raises(Inadmissible):
        geo.theta_kinematics(f, 0.0, h=0.6)
    with pytest.raises(Inadmissible):
        geo.theta_kinematics(f, 0.3, h=0.2)


def test_fd_step_scales_with_domain():
    s = geo.builtin_surface("cylinder", (2.0,))
    assert s.fd_steps() == pytest.approx((4.0 * 1e-4, 1e-4))
    assert geo.builtin_surface("sphere").domain[0] == pytest.approx((math.pi / 4, 3 * math.pi / 4))

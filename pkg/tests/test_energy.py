import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cosserat_shell import energy as en
from cosserat_shell import geometry as geo
from cosserat_shell import kinematics as kin
from cosserat_shell import linalg3 as la
from cosserat_shell import suites
from cosserat_shell.material import MaterialParams


def test_bilinear_forms_are_symmetric(params, rng):
    X, Y = rng.standard_normal((2, 3, 3))
    for name in ("Wmp", "Wshell", "Wcurv"):
        assert en.evaluate_form(name, X, Y, params) == pytest.approx(en.evaluate_form(name, Y, X, params))
        assert en.evaluate_form(name, X, params=params) > 0
    with pytest.raises(ValueError):
        en.evaluate_form("W", X, params=params)


def test_form_relations(params, rng):
    X, Y = rng.standard_normal((2, 3, 3))
    extra = params.lam**2 / (2 * (params.lam + 2 * params.mu)) * la.tr(X) * la.tr(Y)
    assert en.W_mp(X, Y, params) == pytest.approx(en.W_shell(X, Y, params) + extra, rel=1e-14)
    assert en.W_mp(np.eye(3), np.eye(3), params) == pytest.approx(3 * params.mu + 4.5 * params.lam)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-0.2, 0.2))
def test_inverse_b_series(H, K, x):
    if 1 - 2 * H * x + K * x * x < 0.3:
        return
    c = en.inv_b_series(H, K, 4)
    exact = 1 / (1 - 2 * H * x + K * x * x)
    approx = sum(ck * x**k for k, ck in enumerate(c))
    bound = 50 * (1 + abs(H) + abs(K)) ** 5 * abs(x) ** 5
    assert abs(exact - approx) <= bound + 1e-14
    assert c[2] == pytest.approx(4 * H * H - K) and c[4] == pytest.approx(K * K - 12 * H * H * K + 16 * H**4)


def test_series_matches_strain_polynomial(surface, params, rng):
    f = geo.frame_at(surface, *suites.sample_points(surface, 1, rng))[0]
    sm = kin.strain_measures(f, suites.random_state(f, rng), params)
    sc = en.series_coefficients(f, sm, params)
    for x3 in (-0.02, 0.005, 0.02):
        b = geo.thickness_factor(f, x3)
        Et = kin.reconstructed_strain(f, sm, x3)
        Gt = kin.wryness(f, sm, x3)
        assert b**2 * en.W_mp(Et, Et, params) == pytest.approx(sum(c * x3**k for k, c in enumerate(sc.C)), abs=1e-13)
        assert b**2 * en.W_curv(Gt, Gt, params) == pytest.approx(sum(d * x3**k for k, d in enumerate(sc.D)), abs=1e-13)


def test_combination_identities(surface, params, rng):
    assert suites.series_suite(surface, params, rng, n=10)[0].max_residual < 1e-10


def test_plate_limit(params, rng):
    f = geo.frame_at(geo.builtin_surface("plate"), 0.4, 0.6)
    sm = kin.strain_measures(f, suites.random_state(f, rng), params)
    eb = en.reduced_density(f, sm, params)
    memb, mb, bc = en.plate_density(sm, params)
    assert eb.memb == memb and eb.bend_curv == pytest.approx(bc, rel=1e-15)
    assert eb.memb_bend == pytest.approx(mb, rel=1e-14)


def test_full_variant_density_is_not_used(params, rng):
    # the reduced density depends on E and Ke only, not on the rho variant
    f = geo.frame_at(geo.builtin_surface("sphere"), 1.0, 0.3)
    st_ = suites.random_state(f, rng)
    a = en.reduced_density(f, kin.strain_measures(f, st_, params), params)
    b = en.reduced_density(f, kin.strain_measures(f, st_, params, "full"), params)
    assert a.total == b.total


def test_load_potential(rng):
    res = en.LoadResultants(f_bar=np.array([0, 0, -2.0]), c_omega=np.array([1.0, 0, 0]))
    n0 = np.array([0, 0, 1.0])
    Q = la.polar_decompose(np.eye(3) + la.anti(np.array([0.3, 0, 0])))[0]
    v = en.load_potential(res, np.array([0, 0, 0.5]), np.zeros(3), Q, n0)
    assert v == pytest.approx(-1.0 + (Q @ n0 - n0)[0])
    assert en.load_potential(res, np.zeros(3), np.zeros(3), Q, n0, edge=True) == 0.0


def test_wp_expansion_moduli(params):
    h, mu = params.h, params.mu
    lam = params.lam
    young = mu * (3 * lam + 2 * mu) / (lam + mu)
    nu = lam / (2 * (lam + mu))
    C = young * h / (1 - nu**2)
    D = young * h**3 / (12 * (1 - nu**2))
    assert C * (1 - nu) == pytest.approx(2 * mu * h)
    assert D * (1 - nu) == pytest.approx(mu * h**3 / 6)
    assert C == pytest.approx(4 * mu * (lam + mu) * h / (lam + 2 * mu))
    assert C * nu == pytest.approx(2 * mu * lam * h / (lam + 2 * mu))


def test_wp_density_against_expanded_form(params, rng):
    f = geo.frame_at(geo.builtin_surface("cylinder"), 0.1, 0.3)
    E, Ke = (rng.standard_normal((3, 3)) * [1, 1, 0] @ f.grad_theta0_inv for _ in range(2))
    h, mu, lam = params.h, params.mu, params.lam
    Ep, Kp = f.A @ E, f.A @ Ke
    En, Kn = E.T @ f.n0, Ke.T @ f.n0
    trE, trK = la.tr(Ep), la.tr(Kp)
    expanded = 0.5 * (2 * mu * h * (la.sqnorm(la.sym(Ep)) + la.sqnorm(la.skew(Ep)))
                      + 2 * mu * lam * h / (lam + 2 * mu) * trE**2 + 5 / 6 * 2 * mu * h * En @ En
                      + mu * h**3 / 6 * (la.sqnorm(la.sym(Kp)) + la.sqnorm(la.skew(Kp)))
                      + mu * lam * h**3 / (6 * (lam + 2 * mu)) * trK**2 + 7 / 10 * mu * h**3 / 6 * Kn @ Kn)
    assert en.wp_density(E, Ke, f, params) == pytest.approx(expanded, rel=1e-13)


def test_identification(surface, params, rng):
    res = suites.split_suite(surface, params, rng, n=20)
    assert all(r.max_residual < 1e-12 for r in res), res


def test_zero_cosserat_couple_modulus():
    p = MaterialParams(mu=1.0, lam=0.5, mu_c=0.0, h=0.1)
    c = en.identify_coefficients(p, 0.7)
    assert c.alpha[1] == c.alpha[2] == c.alpha[3] and c.mu_c_drill == 0.0


def test_identification_reproduces_plate_moduli(params):
    c = en.identify_coefficients(params, 0.0)
    h, mu, lam = params.h, params.mu, params.lam
    assert c.alpha[0] == pytest.approx(2 * mu * lam * h / (lam + 2 * mu))
    assert c.alpha[2] - c.alpha[1] == pytest.approx(2 * params.mu_c * h)
    assert c.beta[2] == pytest.approx(h * mu * params.L_c**2 * (params.b1 + params.b2))


def test_sixparam_dispatch(params, rng):
    f = geo.frame_at(geo.builtin_surface("sphere"), 1.0, 0.3)
    sm = kin.strain_measures(f, suites.random_state(f, rng), params)
    assert en.sixparam_density(sm, f, "WP", params) == en.wp_density(sm.E, sm.Ke, f, params)
    with pytest.raises(ValueError):
        en.sixparam_density(sm, f, "W", params)

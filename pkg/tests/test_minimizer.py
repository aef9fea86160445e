import numpy as np
import pytest

from cosserat_shell import geometry as geo
from cosserat_shell import minimizer as mn
from cosserat_shell.energy import LoadResultants
from cosserat_shell.errors import ConfigError, InvalidBCs
from cosserat_shell.quaternion import quat_mul


@pytest.fixture(scope="module")
def small_problem():
    from cosserat_shell.material import MaterialParams
    p = MaterialParams(mu=1.0, lam=0.7, mu_c=0.3, L_c=0.5, b1=1.1, b2=0.9, b3=1 / 3, h=0.1)
    s = geo.builtin_surface("cylinder")
    grid = mn.ShellGrid(s, 7, 6)
    return mn.assemble(grid, mn.clamped(grid, ("left",)), s, p)


def test_grid_layout():
    g = mn.ShellGrid(geo.builtin_surface("plate"), 4, 3)
    assert g.cells.shape == (6, 4) and g.n_nodes == 12
    assert set(g.boundary_nodes()) == set(range(12)) - {4, 7}
    with pytest.raises(ConfigError):
        g.side_nodes("north")


def test_reference_is_stationary(small_problem):
    d0 = small_problem.reference_dofs()
    assert abs(small_problem.energy(d0)) < 1e-14
    assert np.linalg.norm(small_problem.gradient(d0)) < 1e-10
    dofs, rep = mn.minimize(small_problem)
    assert rep.converged and rep.iterations == 0


def test_gradient_matches_central_differences(small_problem):
    rng = np.random.default_rng(3)
    d = small_problem.reference_dofs() + 0.05 * rng.standard_normal(small_problem.reference_dofs().size)
    _, err, _ = mn.fd_gradient_check(small_problem, d, n_samples=20)
    assert err.max() < 1e-6


def test_empty_clamp_set_is_rejected(params):
    g = mn.ShellGrid(geo.builtin_surface("plate"), 3, 3)
    with pytest.raises(InvalidBCs):
        mn.assemble(g, mn.clamped(g, ()), None, params)
    with pytest.raises(InvalidBCs):
        mn.assemble(g, mn.clamped(g, ("left",), traction_sides=("left",)), None, params)


def test_dead_load_gives_negative_energy_after_one_step(params):
    s = geo.builtin_surface("plate")
    g = mn.ShellGrid(s, 7, 7)
    pr = mn.assemble(g, mn.clamped(g, ("left",), loads=LoadResultants(f_bar=np.array([0, 0, -1e-3]))), s, params)
    _, rep = mn.minimize(pr, mn.SolverConfig(max_iters=1))
    assert rep.iterations == 1 and rep.energy_history[-1] < 0


def test_edge_traction_does_work(params):
    s = geo.builtin_surface("plate")
    g = mn.ShellGrid(s, 5, 5)
    bcs = mn.clamped(g, ("left",), traction_sides=("right",), loads=LoadResultants(t_bar=np.array([1e-3, 0, 0])))
    pr = mn.assemble(g, bcs, s, params)
    u, q = pr.unpack(pr.reference_dofs())
    u[:, 0] = 0.1
    assert pr.breakdown(pr.pack(u, q))["load"] == pytest.approx(1e-4, rel=1e-12)


def test_plate_stretch_recovers_thickness_stretch(params):
    s = geo.builtin_surface("plate")
    a = 1.01
    energies = []
    for n in (9, 17):
        g = mn.ShellGrid(s, n, n)
        pr = mn.assemble(g, mn.clamped(g, m_map=lambda y, x: a * y), s, params)
        dofs, rep = mn.minimize(pr)
        assert rep.converged
        assert np.all(np.diff(rep.energy_history) <= 0)
        rho_m, _ = pr.cell_center_rho(dofs)
        assert np.abs(rho_m - (1 - params.lam_ratio * 2 * (a - 1))).max() < 1e-3
        q = dofs[3 * pr.n_free:].reshape(-1, 4)
        assert np.abs(np.linalg.norm(q, axis=1) - 1).max() < 1e-12
        energies.append(rep.breakdown["total"])
    assert abs(energies[1] - energies[0]) < 0.05 * abs(energies[1])


def test_gradient_descent_option_is_monotone(params):
    s = geo.builtin_surface("plate")
    g = mn.ShellGrid(s, 5, 5)
    pr = mn.assemble(g, mn.clamped(g, m_map=lambda y, x: 1.02 * y), s, params)
    _, rep = mn.minimize(pr, mn.SolverConfig(optimizer="gradient_descent", max_iters=30))
    assert np.all(np.diff(rep.energy_history) <= 0) and rep.energy_history[-1] < rep.energy_history[0]


def test_frame_indifference(params):
    # superposed rigid rotation of the whole discrete state leaves the energy unchanged (bilinear y0)
    s = geo.builtin_surface("plate")
    g = mn.ShellGrid(s, 5, 4)
    rng = np.random.default_rng(0)
    n = g.n_nodes
    u = 0.05 * rng.standard_normal((n, 3))
    q = np.array([1.0, 0, 0, 0]) + 0.1 * rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    y0 = g.y0_nodes()
    fixed = g.side_nodes("left")
    pr = mn.assemble(g, mn.BoundaryConditions(fixed, (y0 + u)[fixed], q[fixed]), s, params)
    qg = np.array([np.cos(0.4), 0.3 * np.sin(0.4), -0.5 * np.sin(0.4), np.sqrt(0.66) * np.sin(0.4)])
    from cosserat_shell.quaternion import quat_to_mat
    Rg = quat_to_mat(qg)
    u2 = (y0 + u) @ Rg.T - y0
    q2 = quat_mul(np.broadcast_to(qg, q.shape), q)
    pr2 = mn.assemble(g, mn.BoundaryConditions(fixed, (y0 + u2)[fixed], q2[fixed]), s, params)
    e1, e2 = pr.energy(pr.pack(u, q)), pr2.energy(pr2.pack(u2, q2))
    assert e2 == pytest.approx(e1, rel=1e-10)


def test_solver_config_validation():
    with pytest.raises(ConfigError):
        mn.SolverConfig(optimizer="newton")
    with pytest.raises(ConfigError):
        mn.SolverConfig(armijo_c=1.5)


def test_node_records(small_problem):
    rec = small_problem.node_records(small_problem.reference_dofs())
    assert rec.shape == (small_problem.grid.n_nodes, 12)
    assert np.allclose(rec[:, 2:5], rec[:, 5:8]) and np.allclose(rec[:, 8], 1.0)

"""Discrete minimization of the reduced shell energy over (m, elastic rotation) on a structured grid.

Per node the unknowns are the displacement u = m - y0 and a quaternion of the
elastic rotation. Inside a cell u is bilinear and the rotation is the
homogeneous quaternion map applied to the bilinear blend of the corner
quaternions, so both field derivatives are available in closed form. The
energy is traced by jax and differentiated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import jax
import numpy as np

jax.config.update("jax_enable_x64", True)
import jax.numpy as jnp  # noqa: E402

from .energy import LoadResultants, reduced_density_kernel  # noqa: E402
from .errors import ConfigError, Inadmissible, InvalidBCs, LineSearchStalled  # noqa: E402
from .geometry import Surface, admissibility_check, frame_at, surface_derivatives  # noqa: E402
from .kinematics import rho_kernel, strain_kernel  # noqa: E402
from .material import MaterialParams  # noqa: E402
from .quaternion import quat_mul, quat_to_mat, quat_to_mat_derivative, rotation_retraction  # noqa: E402

SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class ShellGrid:
    """n1 x n2 nodes, uniformly spaced over the rectangular parameter domain of ``surface``."""

    surface: Surface
    n1: int
    n2: int
    n_gauss: int = 2

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ConfigError("grid needs at least 2 x 2 nodes")
        if self.n_gauss not in (2, 3):
            raise ConfigError("n_gauss must be 2 or 3")

    @property
    def axes(self):
        (a1, b1), (a2, b2) = self.surface.domain
        return np.linspace(a1, b1, self.n1), np.linspace(a2, b2, self.n2)

    @property
    def spacing(self):
        (a1, b1), (a2, b2) = self.surface.domain
        return (b1 - a1) / (self.n1 - 1), (b2 - a2) / (self.n2 - 1)

    @property
    def n_nodes(self) -> int:
        return self.n1 * self.n2

    def node(self, i, j):
        return np.asarray(i) * self.n2 + np.asarray(j)

    @property
    def coords(self) -> np.ndarray:
        g1, g2 = self.axes
        X1, X2 = np.meshgrid(g1, g2, indexing="ij")
        return np.stack([X1.ravel(), X2.ravel()], axis=-1)

    @property
    def cells(self) -> np.ndarray:
        """Corner node indices (i,j), (i+1,j), (i,j+1), (i+1,j+1) per cell."""
        I, J = np.meshgrid(np.arange(self.n1 - 1), np.arange(self.n2 - 1), indexing="ij")
        I, J = I.ravel(), J.ravel()
        return np.stack([self.node(I, J), self.node(I + 1, J), self.node(I, J + 1), self.node(I + 1, J + 1)], axis=-1)

    def side_nodes(self, side: str) -> np.ndarray:
        if side == "left":
            return self.node(0, np.arange(self.n2))
        if side == "right":
            return self.node(self.n1 - 1, np.arange(self.n2))
        if side == "bottom":
            return self.node(np.arange(self.n1), 0)
        if side == "top":
            return self.node(np.arange(self.n1), self.n2 - 1)
        raise ConfigError(f"unknown side {side!r}; expected one of {SIDES}")

    def boundary_nodes(self, sides=SIDES) -> np.ndarray:
        return np.unique(np.concatenate([self.side_nodes(s) for s in sides]))

    def y0_nodes(self) -> np.ndarray:
        c = self.coords
        return surface_derivatives(self.surface, c[:, 0], c[:, 1])[0]


@dataclass(frozen=True)
class BoundaryConditions:
    """Clamped node set with prescribed m and rotation quaternions, plus dead loads.

    ``traction_sides`` names the grid sides carrying the edge resultants of ``loads``.
    """

    dirichlet_nodes: np.ndarray
    m_prescribed: np.ndarray
    q_prescribed: np.ndarray
    traction_sides: tuple = ()
    loads: LoadResultants = field(default_factory=LoadResultants)


def clamped(grid: ShellGrid, sides=SIDES, m_map=None, q_value=(1.0, 0.0, 0.0, 0.0), traction_sides=(),
            loads: LoadResultants | None = None) -> BoundaryConditions:
    """Clamp whole sides. ``m_map(y0, x)`` gives the prescribed positions (default: the reference)."""
    nodes = grid.boundary_nodes(sides) if sides else np.zeros(0, int)
    y0 = grid.y0_nodes()[nodes]
    m = y0 if m_map is None else np.asarray(m_map(y0, grid.coords[nodes]), float)
    q = np.broadcast_to(np.asarray(q_value, float), (len(nodes), 4)).copy()
    return BoundaryConditions(nodes, m, q, tuple(traction_sides), loads or LoadResultants())


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    gtol: float = 1e-10
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    fd_step: float = 1e-6
    optimizer: str = "lbfgs"
    memory: int = 10

    def __post_init__(self):
        if self.optimizer not in ("lbfgs", "gradient_descent"):
            raise ConfigError("optimizer must be 'lbfgs' or 'gradient_descent'")
        if not (0 < self.armijo_c < 1 and 0 < self.backtrack < 1):
            raise ConfigError("line-search parameters must lie in (0, 1)")
        if self.max_iters < 0 or self.gtol <= 0 or self.fd_step <= 0 or self.memory < 1:
            raise ConfigError("iteration counts, tolerances and steps must be positive")


def _shape_functions(n_gauss: int):
    t, w = np.polynomial.legendre.leggauss(n_gauss)
    t, w = 0.5 * (t + 1), 0.5 * w
    xi, eta = [a.ravel() for a in np.meshgrid(t, t, indexing="ij")]
    wts = np.outer(w, w).ravel()
    return xi, eta, wts


def _bilinear(xi, eta):
    """Values (G, 4) and reference derivatives (G, 4, 2) of the corner shape functions."""
    N = np.stack([(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta], axis=-1)
    dxi = np.stack([-(1 - eta), 1 - eta, -eta, eta], axis=-1)
    deta = np.stack([-(1 - xi), -xi, 1 - xi, xi], axis=-1)
    return N, np.stack([dxi, deta], axis=-1)


@dataclass
class _EdgeData:
    nodes: np.ndarray  # (Ne, 2)
    N: np.ndarray  # (G, 2)
    weight: np.ndarray  # (Ne, G) line element times Gauss weight
    n0: np.ndarray  # (Ne, G, 3)


class Problem:
    """Energy and gradient of the discretized shell functional over the free DOFs.

    The DOF vector is [u of free nodes (3 each), quaternions of free nodes (4 each)].
    """

    def __init__(self, grid: ShellGrid, bcs: BoundaryConditions, params: MaterialParams):
        self.grid, self.bcs, self.params = grid, bcs, params
        n = grid.n_nodes
        fixed = np.asarray(bcs.dirichlet_nodes, int)
        if fixed.size == 0:
            raise InvalidBCs("the clamped node set is empty")
        if len(np.unique(fixed)) != fixed.size or fixed.min() < 0 or fixed.max() >= n:
            raise InvalidBCs("clamped node indices must be unique and inside the grid")
        for s in bcs.traction_sides:
            if np.all(np.isin(grid.side_nodes(s), fixed)):
                raise InvalidBCs(f"traction side {s!r} is entirely clamped")
        self.fixed = fixed
        self.free = np.setdiff1d(np.arange(n), fixed)
        self.perm = np.argsort(np.concatenate([self.free, fixed]))
        self.y0 = grid.y0_nodes()
        self.u_fixed = np.asarray(bcs.m_prescribed, float) - self.y0[fixed]
        qf = np.asarray(bcs.q_prescribed, float)
        self.q_fixed = qf / np.linalg.norm(qf, axis=-1, keepdims=True)

        xi, eta, wts = _shape_functions(grid.n_gauss)
        Nq, dN = _bilinear(xi, eta)
        h1, h2 = grid.spacing
        self.cells = grid.cells
        corner = grid.coords[self.cells[:, 0]]
        x1 = corner[:, 0:1] + h1 * xi
        x2 = corner[:, 1:2] + h2 * eta
        frame = frame_at(grid.surface, x1, x2)
        ok, _, _ = admissibility_check(frame, params.h)
        if not ok:
            raise Inadmissible(f"thickness h={params.h} violates h|kappa| < 1/2 on the grid")
        self.frame = frame
        self.Nq = Nq
        self.dN = dN / np.array([h1, h2])
        self.weights = wts * h1 * h2 * frame.det0
        self.edges = [self._edge_data(s) for s in bcs.traction_sides]

        self._energy = jax.jit(self._energy_fn)
        self._value_and_grad = jax.jit(jax.value_and_grad(self._energy_fn))
        self._parts = jax.jit(self._parts_fn)

    # -- layout -------------------------------------------------------------
    @property
    def n_free(self) -> int:
        return self.free.size

    def pack(self, u, q) -> np.ndarray:
        return np.concatenate([np.asarray(u)[self.free].ravel(), np.asarray(q)[self.free].ravel()])

    def unpack(self, dofs):
        """Full nodal (u, q) arrays, clamped values filled in."""
        nf = self.n_free
        u = np.concatenate([np.reshape(dofs[: 3 * nf], (nf, 3)), self.u_fixed])[self.perm]
        q = np.concatenate([np.reshape(dofs[3 * nf:], (nf, 4)), self.q_fixed])[self.perm]
        return u, q

    def reference_dofs(self) -> np.ndarray:
        n = self.grid.n_nodes
        q = np.zeros((n, 4))
        q[:, 0] = 1.0
        return self.pack(np.zeros((n, 3)), q)

    # -- traced energy ------------------------------------------------------
    def _full(self, dofs):
        nf = self.n_free
        u = jnp.concatenate([dofs[: 3 * nf].reshape(nf, 3), self.u_fixed])[self.perm]
        q = jnp.concatenate([dofs[3 * nf:].reshape(nf, 4), self.q_fixed])[self.perm]
        return u, q

    def _gauss_fields(self, u, q):
        uc, qc = u[self.cells], q[self.cells]
        ug = jnp.einsum("gk,ckd->cgd", self.Nq, uc)
        dug = jnp.einsum("gka,ckd->cgda", self.dN, uc)
        qg = jnp.einsum("gk,ckd->cgd", self.Nq, qc)
        dqg = jnp.einsum("gka,ckd->cgad", self.dN, qc)
        Q = quat_to_mat(qg, xp=jnp)
        dQ = jnp.stack([quat_to_mat_derivative(qg, dqg[..., a, :], xp=jnp) for a in range(2)], axis=-3)
        return ug, self.frame.grad_y0 + dug, Q, dQ

    def _parts_fn(self, dofs):
        f = self.frame
        u, q = self._full(dofs)
        ug, grad_m, Q, dQ = self._gauss_fields(u, q)
        E, Ke, CKe = strain_kernel(grad_m, Q, dQ, f.n0, f.grad_theta0_inv, f.C, f.B, xp=jnp)
        memb, mb, bc = reduced_density_kernel(E, Ke, CKe, f.B, f.H, f.K, self.params)
        w = self.weights
        loads = self.bcs.loads
        turned = (Q @ f.n0[..., None])[..., 0] - f.n0
        load = jnp.sum(w * (ug @ jnp.asarray(loads.f_bar, float) + turned @ jnp.asarray(loads.c_omega, float)))
        for ed in self.edges:
            ue = jnp.einsum("gk,ekd->egd", ed.N, u[ed.nodes])
            qe = jnp.einsum("gk,ekd->egd", ed.N, q[ed.nodes])
            te = (quat_to_mat(qe, xp=jnp) @ ed.n0[..., None])[..., 0] - ed.n0
            load = load + jnp.sum(ed.weight * (ue @ jnp.asarray(loads.t_bar, float)
                                               + te @ jnp.asarray(loads.c_gamma, float)))
        return jnp.sum(w * memb), jnp.sum(w * mb), jnp.sum(w * bc), load

    def _energy_fn(self, dofs):
        memb, mb, bc, load = self._parts_fn(dofs)
        return memb + mb + bc - load

    def _edge_data(self, side: str) -> _EdgeData:
        nodes = self.grid.side_nodes(side)
        pairs = np.stack([nodes[:-1], nodes[1:]], axis=-1)
        t, w = np.polynomial.legendre.leggauss(self.grid.n_gauss)
        t, w = 0.5 * (t + 1), 0.5 * w
        N = np.stack([1 - t, t], axis=-1)
        c = self.grid.coords
        pa, pb = c[pairs[:, 0]], c[pairs[:, 1]]
        pts = pa[:, None, :] + t[None, :, None] * (pb - pa)[:, None, :]
        fr = frame_at(self.grid.surface, pts[..., 0], pts[..., 1])
        tangent = np.einsum("egka,ea->egk", fr.grad_y0, pb - pa)
        return _EdgeData(pairs, N, np.linalg.norm(tangent, axis=-1) * w, fr.n0)

    # -- public -------------------------------------------------------------
    def energy(self, dofs) -> float:
        return float(self._energy(jnp.asarray(dofs, float)))

    def gradient(self, dofs) -> np.ndarray:
        return np.asarray(self._value_and_grad(jnp.asarray(dofs, float))[1])

    def value_and_grad(self, dofs):
        v, g = self._value_and_grad(jnp.asarray(dofs, float))
        return float(v), np.asarray(g)

    def breakdown(self, dofs) -> dict:
        memb, mb, bc, load = (float(v) for v in self._parts(jnp.asarray(dofs, float)))
        return {"memb": memb, "memb_bend": mb, "bend_curv": bc, "load": load, "total": memb + mb + bc - load}

    def cell_center_rho(self, dofs):
        """(rho_m, rho_b) at every cell center, from the interpolated fields."""
        u, q = self.unpack(dofs)
        Nc, dNc = _bilinear(np.array([0.5]), np.array([0.5]))
        dNc = dNc / np.array(self.grid.spacing)
        cc = self.grid.coords[self.cells[:, 0]] + 0.5 * np.array(self.grid.spacing)
        f = frame_at(self.grid.surface, cc[:, 0], cc[:, 1])
        uc, qc = u[self.cells], q[self.cells]
        grad_m = f.grad_y0 + np.einsum("ka,ckd->cda", dNc[0], uc)
        qg = np.einsum("k,ckd->cd", Nc[0], qc)
        dqg = np.einsum("ka,ckd->cad", dNc[0], qc)
        Q = quat_to_mat(qg)
        dQ = np.stack([quat_to_mat_derivative(qg, dqg[:, a]) for a in range(2)], axis=-3)
        E, _, CKe = strain_kernel(grad_m, Q, dQ, f.n0, f.grad_theta0_inv, f.C, f.B)
        return rho_kernel(E, CKe, f.B, f.H, self.params.lam_ratio)

    def node_records(self, dofs) -> np.ndarray:
        """Per-node rows x1, x2, y0 (3), m (3), quaternion (4)."""
        u, q = self.unpack(dofs)
        q = q / np.linalg.norm(q, axis=-1, keepdims=True)
        return np.concatenate([self.grid.coords, self.y0, self.y0 + u, q], axis=-1)


def assemble(grid: ShellGrid, bcs: BoundaryConditions, surface: Surface | None, params: MaterialParams) -> Problem:
    if surface is not None and surface != grid.surface:
        raise ConfigError("grid was built on a different surface")
    return Problem(grid, bcs, params)


# ---------------------------------------------------------------------------
# optimizer


def _tangent_basis(q):
    """(n, 4, 3): derivative of q * exp(w) with respect to w at w = 0."""
    e = np.eye(3)
    cols = [quat_mul(q, np.concatenate([np.zeros(1), 0.5 * e[k]])) for k in range(3)]
    return np.stack(cols, axis=-1)


@dataclass
class SolveReport:
    converged: bool
    reason: str
    iterations: int
    energy_history: list
    grad_norm: float
    breakdown: dict
    error: str | None = None


def _tangent_gradient(problem: Problem, dofs, g):
    nf = problem.n_free
    q = dofs[3 * nf:].reshape(nf, 4)
    gq = g[3 * nf:].reshape(nf, 4)
    gw = np.einsum("nd,ndk->nk", gq, _tangent_basis(q))
    return np.concatenate([g[: 3 * nf], gw.ravel()])


def _step(problem: Problem, dofs, d):
    nf = problem.n_free
    q = dofs[3 * nf:].reshape(nf, 4)
    q_new = rotation_retraction(q, d[3 * nf:].reshape(nf, 3))
    return np.concatenate([dofs[: 3 * nf] + d[: 3 * nf], q_new.ravel()])


def minimize(problem: Problem, config: SolverConfig = SolverConfig(), dofs0=None, raise_on_stall: bool = False):
    """Armijo line-search descent on (u, rotation increments), rotations updated by retraction.

    Returns (dofs, report). A stalled line search ends the run with the last
    accepted iterate; pass ``raise_on_stall`` to get LineSearchStalled instead.
    """
    dofs = problem.reference_dofs() if dofs0 is None else np.asarray(dofs0, float).copy()
    nf = problem.n_free
    q = dofs[3 * nf:].reshape(nf, 4)
    dofs[3 * nf:] = (q / np.linalg.norm(q, axis=-1, keepdims=True)).ravel()
    f, g = problem.value_and_grad(dofs)
    gt = _tangent_gradient(problem, dofs, g)
    history = [f]
    S, Y = [], []
    reason, converged, err = "max_iters", False, None
    it = 0
    while True:
        gn = float(np.linalg.norm(gt))
        if gn <= config.gtol:
            reason, converged = "gradient_tolerance", True
            break
        if it >= config.max_iters:
            break
        d = -gt
        if config.optimizer == "lbfgs" and S:
            d = -_two_loop(gt, S, Y)
            if d @ gt >= 0:
                S, Y = [], []
                d = -gt
        slope = float(d @ gt)
        alpha = 1.0 if (config.optimizer == "lbfgs" and S) else min(1.0, 1.0 / max(gn, 1e-300))
        accepted = False
        for _ in range(config.max_backtracks):
            trial = _step(problem, dofs, alpha * d)
            ft = problem.energy(trial)
            if np.isfinite(ft) and ft <= f + config.armijo_c * alpha * slope:
                accepted = True
                break
            alpha *= config.backtrack
        if not accepted:
            reason, err = "line_search_stalled", f"no Armijo step after {config.max_backtracks} backtracks"
            break
        ft, g_new = problem.value_and_grad(trial)
        gt_new = _tangent_gradient(problem, trial, g_new)
        s, y = alpha * d, gt_new - gt
        if s @ y > 1e-16 * np.linalg.norm(s) * np.linalg.norm(y):
            S.append(s)
            Y.append(y)
            if len(S) > config.memory:
                S.pop(0)
                Y.pop(0)
        dofs, f, gt = trial, ft, gt_new
        history.append(f)
        it += 1
    report = SolveReport(converged=converged, reason=reason, iterations=it, energy_history=history,
                         grad_norm=float(np.linalg.norm(gt)), breakdown=problem.breakdown(dofs), error=err)
    if err is not None and raise_on_stall:
        raise LineSearchStalled(err)
    return dofs, report


def _two_loop(g, S, Y):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(S), reversed(Y)):
        rho = 1.0 / (y @ s)
        a = rho * (s @ q)
        q -= a * y
        alphas.append((rho, a))
    s, y = S[-1], Y[-1]
    r = (s @ y) / (y @ y) * q
    for (s, y), (rho, a) in zip(zip(S, Y), reversed(alphas)):
        r += (a - rho * (y @ r)) * s
    return r


def fd_gradient_check(problem: Problem, dofs, n_samples: int = 20, step: float = 1e-6, rng=None):
    """Relative errors of the assembled gradient against central differences on sampled DOFs."""
    rng = np.random.Generator(np.random.Philox(0)) if rng is None else rng
    g = problem.gradient(dofs)
    idx = rng.choice(dofs.size, size=min(n_samples, dofs.size), replace=False)
    out = []
    for i in idx:
        e = np.zeros_like(dofs)
        e[i] = step
        fd = (problem.energy(dofs + e) - problem.energy(dofs - e)) / (2 * step)
        out.append(abs(fd - g[i]) / max(abs(fd), abs(g[i]), 1e-300))
    return idx, np.asarray(out), g[idx]


__all__ = ["ShellGrid", "BoundaryConditions", "SolverConfig", "Problem", "SolveReport", "clamped", "assemble",
           "minimize", "rotation_retraction", "fd_gradient_check"]

"""Referential midsurface geometry and the thickness map x3 -> y0 + x3 n0.

Surfaces are evaluated point-wise or on stacked parameter arrays. Every
frame quantity carries the leading batch shape of the parameter arrays.

Orientation: the unit normal is always (d1 y0 x d2 y0)/|.|, with no
re-orientation. With the catalog parametrizations below this gives
    cylinder(r):  outward normal, H = -1/(2r), K = 0
    sphere(R):    outward normal, H = -1/R,    K = 1/R^2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg3 as la
from .errors import Inadmissible, RankDeficient, UnknownSurface

CATALOG = ("plate", "cylinder", "sphere", "hyperbolic_paraboloid", "polynomial")
MAX_POLY_DEGREE = 6
TOL_RANK = 1e-8
FD_REL_STEP = 1e-4


@dataclass(frozen=True)
class Surface:
    """Parametrized midsurface y0 over a rectangle in parameter space.

    ``params`` holds the catalog parameters (r, R or (a, b)); ``coeffs`` holds
    the monomial table ((i, j, c), ...) of a polynomial graph surface
    y0 = (x1, x2, sum c x1^i x2^j).
    """

    kind: str
    params: tuple[float, ...] = ()
    domain: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 1.0), (0.0, 1.0))
    mode: str = "analytic"
    eps: tuple[float, float] | None = None
    coeffs: tuple[tuple[int, int, float], ...] = ()

    def fd_steps(self) -> tuple[float, float]:
        if self.eps is not None:
            return self.eps
        (a1, b1), (a2, b2) = self.domain
        return ((b1 - a1) * FD_REL_STEP, (b2 - a2) * FD_REL_STEP)

    def contains(self, x1, x2) -> bool:
        (a1, b1), (a2, b2) = self.domain
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        return bool(np.all((x1 >= a1) & (x1 <= b1) & (x2 >= a2) & (x2 <= b2)))


def builtin_surface(name: str, params=(), domain=None, mode: str = "analytic", eps=None, coeffs=()) -> Surface:
    """Catalog constructor with sensible default parameter domains."""
    params = tuple(float(p) for p in params)
    if name == "plate":
        dom = ((0.0, 1.0), (0.0, 1.0))
    elif name == "cylinder":
        (r,) = params or (1.0,)
        params = (r,)
        dom = ((-r, r), (0.0, 1.0))
    elif name == "sphere":
        (R,) = params or (1.0,)
        params = (R,)
        dom = ((math.pi / 4, 3 * math.pi / 4), (0.0, math.pi / 2))
    elif name == "hyperbolic_paraboloid":
        a, b = params or (1.0, 1.0)
        params = (a, b)
        dom = ((-0.5, 0.5), (-0.5, 0.5))
    elif name == "polynomial":
        coeffs = tuple((int(i), int(j), float(c)) for i, j, c in coeffs)
        for i, j, _ in coeffs:
            if i < 0 or j < 0 or i + j > MAX_POLY_DEGREE:
                raise UnknownSurface(f"monomial x1^{i} x2^{j} exceeds total degree {MAX_POLY_DEGREE}")
        dom = ((-0.5, 0.5), (-0.5, 0.5))
    else:
        raise UnknownSurface(f"unknown surface {name!r}; catalog is {', '.join(CATALOG)}")
    if domain is not None:
        dom = tuple(tuple(float(v) for v in d) for d in domain)
    if mode not in ("analytic", "fd"):
        raise ValueError(f"derivative mode must be 'analytic' or 'fd', got {mode!r}")
    return Surface(name, params, dom, mode, None if eps is None else tuple(eps), tuple(coeffs))


# ---------------------------------------------------------------------------
# parametrizations: value, first and second derivatives


def _graph(x1, x2, z, z1, z2, z11, z12, z22):
    shape = np.shape(z)
    y = np.stack([x1 * np.ones(shape), x2 * np.ones(shape), z], axis=-1)
    dy = np.zeros(shape + (3, 2))
    dy[..., 0, 0] = 1.0
    dy[..., 1, 1] = 1.0
    dy[..., 2, 0] = z1
    dy[..., 2, 1] = z2
    ddy = np.zeros(shape + (3, 2, 2))
    ddy[..., 2, 0, 0] = z11
    ddy[..., 2, 0, 1] = z12
    ddy[..., 2, 1, 0] = z12
    ddy[..., 2, 1, 1] = z22
    return y, dy, ddy


def _poly_eval(coeffs, x1, x2, d1: int, d2: int):
    out = np.zeros(np.broadcast(x1, x2).shape)
    for i, j, c in coeffs:
        if i < d1 or j < d2:
            continue
        f1 = math.perm(i, d1)
        f2 = math.perm(j, d2)
        out = out + c * f1 * f2 * x1 ** (i - d1) * x2 ** (j - d2)
    return out


def evaluate_y0(surface: Surface, x1, x2) -> np.ndarray:
    return _analytic(surface, np.asarray(x1, float), np.asarray(x2, float))[0]


def _analytic(surface: Surface, x1, x2):
    x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    kind = surface.kind
    zero = np.zeros(x1.shape)
    if kind == "plate":
        return _graph(x1, x2, zero, zero, zero, zero, zero, zero)
    if kind == "hyperbolic_paraboloid":
        a, b = surface.params
        return _graph(x1, x2, x1**2 / a**2 - x2**2 / b**2, 2 * x1 / a**2, -2 * x2 / b**2,
                      zero + 2 / a**2, zero, zero - 2 / b**2)
    if kind == "polynomial":
        c = surface.coeffs
        return _graph(x1, x2, _poly_eval(c, x1, x2, 0, 0), _poly_eval(c, x1, x2, 1, 0),
                      _poly_eval(c, x1, x2, 0, 1), _poly_eval(c, x1, x2, 2, 0),
                      _poly_eval(c, x1, x2, 1, 1), _poly_eval(c, x1, x2, 0, 2))
    if kind == "cylinder":
        (r,) = surface.params
        s, c = np.sin(x1 / r), np.cos(x1 / r)
        y = np.stack([r * s, x2, r * c], axis=-1)
        dy = np.zeros(x1.shape + (3, 2))
        dy[..., 0, 0] = c
        dy[..., 2, 0] = -s
        dy[..., 1, 1] = 1.0
        ddy = np.zeros(x1.shape + (3, 2, 2))
        ddy[..., 0, 0, 0] = -s / r
        ddy[..., 2, 0, 0] = -c / r
        return y, dy, ddy
    if kind == "sphere":
        (R,) = surface.params
        st, ct, sp, cp = np.sin(x1), np.cos(x1), np.sin(x2), np.cos(x2)
        y = R * np.stack([st * cp, st * sp, ct], axis=-1)
        dy = R * np.stack([np.stack([ct * cp, -st * sp], -1),
                           np.stack([ct * sp, st * cp], -1),
                           np.stack([-st, zero], -1)], axis=-2)
        d11 = -y
        d12 = R * np.stack([-ct * sp, ct * cp, zero], axis=-1)
        d22 = R * np.stack([-st * cp, -st * sp, zero], axis=-1)
        ddy = np.stack([np.stack([d11, d12], -1), np.stack([d12, d22], -1)], axis=-2)
        return y, dy, ddy
    raise UnknownSurface(f"unknown surface {kind!r}")


_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFS = np.array([-2, -1, 0, 1, 2])


def _finite_difference(surface: Surface, x1, x2, eps=None):
    """Fourth-order central differences of y0 only."""
    e1, e2 = eps if eps is not None else surface.fd_steps()
    x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    grid1 = x1[..., None, None] + e1 * _OFFS[:, None]
    grid2 = x2[..., None, None] + e2 * _OFFS[None, :]
    vals = evaluate_y0(surface, grid1, grid2)  # (..., 5, 5, 3)
    y = vals[..., 2, 2, :]
    d1 = np.einsum("i,...ik->...k", _D1, vals[..., :, 2, :]) / e1
    d2 = np.einsum("j,...jk->...k", _D1, vals[..., 2, :, :]) / e2
    d11 = np.einsum("i,...ik->...k", _D2, vals[..., :, 2, :]) / e1**2
    d22 = np.einsum("j,...jk->...k", _D2, vals[..., 2, :, :]) / e2**2
    d12 = np.einsum("i,j,...ijk->...k", _D1, _D1, vals) / (e1 * e2)
    dy = np.stack([d1, d2], axis=-1)
    ddy = np.stack([np.stack([d11, d12], -1), np.stack([d12, d22], -1)], axis=-2)
    return y, dy, ddy


def surface_derivatives(surface: Surface, x1, x2):
    """(y0, grad y0 (3x2), second derivatives (3x2x2)) in the surface's derivative mode."""
    if surface.mode == "fd":
        return _finite_difference(surface, x1, x2)
    return _analytic(surface, x1, x2)


# ---------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class GeometryFrame:
    x: np.ndarray
    y0: np.ndarray
    grad_y0: np.ndarray
    grad_n0: np.ndarray
    n0: np.ndarray
    I: np.ndarray
    II: np.ndarray
    III: np.ndarray
    L: np.ndarray
    H: np.ndarray
    K: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Q0: np.ndarray
    det0: np.ndarray
    grad_theta0: np.ndarray
    grad_theta0_inv: np.ndarray
    batch_shape: tuple = field(default=())

    def __getitem__(self, idx) -> "GeometryFrame":
        """Select one point (or a sub-batch) of a stacked frame."""
        if not self.batch_shape:
            raise IndexError("frame is not batched")
        kw = {name: getattr(self, name)[idx] for name in _FRAME_ARRAYS}
        return GeometryFrame(**kw, batch_shape=np.shape(self.H[idx]))


_FRAME_ARRAYS = ("x", "y0", "grad_y0", "grad_n0", "n0", "I", "II", "III", "L", "H", "K",
                 "A", "B", "C", "Q0", "det0", "grad_theta0", "grad_theta0_inv")


def _det2(M):
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def _polar_rotation(F: np.ndarray) -> np.ndarray:
    flat = F.reshape(-1, 3, 3)
    out = np.empty_like(flat)
    for k in range(flat.shape[0]):
        out[k] = la.polar_decompose(flat[k])[0]
    return out.reshape(F.shape)


def frame_from_derivatives(x, y, dy, ddy) -> GeometryFrame:
    a1, a2 = dy[..., 0], dy[..., 1]
    sv = np.linalg.svd(dy, compute_uv=False)
    if np.any(sv[..., -1] <= TOL_RANK * np.linalg.norm(dy, axis=(-2, -1))):
        raise RankDeficient("grad y0 does not have rank 2")
    c = np.cross(a1, a2)
    cn = np.linalg.norm(c, axis=-1)
    n0 = c / cn[..., None]
    proj = la.ID3 - la.outer(n0, n0)
    dn = []
    for al in range(2):
        dc = np.cross(ddy[..., :, 0, al], a2) + np.cross(a1, ddy[..., :, 1, al])
        dn.append((proj @ dc[..., None])[..., 0] / cn[..., None])
    grad_n0 = np.stack(dn, axis=-1)
    I = la.transpose(dy) @ dy
    II = np.einsum("...kab,...k->...ab", ddy, n0)
    III = la.transpose(grad_n0) @ grad_n0
    L = np.linalg.solve(I, II)
    H = 0.5 * (L[..., 0, 0] + L[..., 1, 1])
    K = _det2(L)
    gt0 = np.concatenate([dy, n0[..., None]], axis=-1)
    gt0_inv = np.linalg.inv(gt0)
    det0 = np.linalg.det(gt0)
    zero_col = np.zeros(dy.shape[:-1] + (1,))
    A = np.concatenate([dy, zero_col], axis=-1) @ gt0_inv
    B = -np.concatenate([grad_n0, zero_col], axis=-1) @ gt0_inv
    C = det0[..., None, None] * (la.transpose(gt0_inv) @ la.J2 @ gt0_inv)
    Q0 = _polar_rotation(gt0)
    return GeometryFrame(x=np.asarray(x, float), y0=y, grad_y0=dy, grad_n0=grad_n0, n0=n0,
                         I=I, II=II, III=III, L=L, H=H, K=K, A=A, B=B, C=C, Q0=Q0,
                         det0=det0, grad_theta0=gt0, grad_theta0_inv=gt0_inv,
                         batch_shape=np.shape(H))


def frame_at(surface: Surface, x1, x2) -> GeometryFrame:
    """Full Gauss frame at one parameter point, or at stacked points if x1, x2 are arrays."""
    x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    y, dy, ddy = surface_derivatives(surface, x1, x2)
    return frame_from_derivatives(np.stack([x1, x2], axis=-1), y, dy, ddy)


def fd_frame_oracle(surface: Surface, x1, x2, eps=None) -> GeometryFrame:
    """Same frame as frame_at, built from fourth-order differences of y0 alone."""
    x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    if eps is not None and np.isscalar(eps):
        eps = (float(eps), float(eps))
    y, dy, ddy = _finite_difference(surface, x1, x2, eps)
    return frame_from_derivatives(np.stack([x1, x2], axis=-1), y, dy, ddy)


def q0_derivatives(surface: Surface, x1: float, x2: float, eps=None) -> np.ndarray:
    """d_alpha Q0 by fourth-order central differences of the polar factor; shape (2, 3, 3)."""
    e1, e2 = eps if eps is not None else surface.fd_steps()
    out = []
    for e, (ux, uy) in ((e1, (1, 0)), (e2, (0, 1))):
        q = [frame_at(surface, x1 + k * e * ux, x2 + k * e * uy).Q0 for k in _OFFS]
        out.append(sum(w * qk for w, qk in zip(_D1, q)) / e)
    return np.stack(out)


# ---------------------------------------------------------------------------
# thickness map


def admissibility_check(frame: GeometryFrame, h: float):
    """Principal curvatures and whether h|kappa_i| < 1/2 for both."""
    disc = np.sqrt(np.maximum(frame.H**2 - frame.K, 0.0))
    k1 = frame.H + disc
    k2 = frame.H - disc
    ok = bool(np.all((h * np.abs(k1) < 0.5) & (h * np.abs(k2) < 0.5)))
    return ok, k1, k2


def thickness_factor(frame: GeometryFrame, x3):
    """b(x3) = 1 - 2H x3 + K x3^2."""
    return 1.0 - 2.0 * frame.H * x3 + frame.K * x3**2


def theta_kinematics(frame: GeometryFrame, x3, h: float | None = None):
    """(grad Theta(x3), det grad Theta(x3), inverse) from the closed forms."""
    if h is not None:
        if not admissibility_check(frame, h)[0]:
            raise Inadmissible(f"thickness h={h} violates h|kappa| < 1/2")
        if np.any(np.abs(x3) > 0.5 * h * (1 + 1e-14)):
            raise Inadmissible("|x3| exceeds h/2")
    x3 = np.asarray(x3, float)
    b = thickness_factor(frame, x3)
    if np.any(b <= 0.0):
        raise Inadmissible("1 - 2H x3 + K x3^2 is not positive")
    zero_col = np.zeros(frame.grad_n0.shape[:-1] + (1,))
    x3m = x3[..., None, None]
    grad = frame.grad_theta0 + x3m * np.concatenate([frame.grad_n0, zero_col], axis=-1)
    det = frame.det0 * b
    Lflat = la.flat_lift(frame.L)
    core = (la.ID3 + x3m * (Lflat - 2.0 * frame.H[..., None, None] * la.ID3)
            + (x3**2 * frame.K)[..., None, None] * la.E3E3)
    inv = core @ frame.grad_theta0_inv / b[..., None, None]
    return grad, det, inv


def inverse_factor(frame: GeometryFrame, x3):
    """The bracket 1 + x3 (L^flat - 2H 1) + x3^2 K e3 e3 of the closed-form inverse."""
    x3 = np.asarray(x3, float)
    Lflat = la.flat_lift(frame.L)
    return (la.ID3 + x3[..., None, None] * (Lflat - 2.0 * frame.H[..., None, None] * la.ID3)
            + (x3**2 * frame.K)[..., None, None] * la.E3E3)


# ---------------------------------------------------------------------------
# identity report


def curvature_tensor_identities(frame: GeometryFrame, dQ0=None, rng=None) -> dict:
    """Residuals of the algebraic identities of A, B, C (max over a batched frame).

    ``dQ0`` (shape (2, 3, 3), unbatched frames only) enables the check that
    expresses B through the rotation gradient of Q0.
    """
    A, B, C = frame.A, frame.B, frame.C
    gt0, gti = frame.grad_theta0, frame.grad_theta0_inv
    H = frame.H[..., None, None]
    K = frame.K[..., None, None]
    nn = la.outer(frame.n0, frame.n0)

    def m(X):
        return float(np.max(np.abs(X))) if np.size(X) else 0.0

    giT = la.transpose(gti)
    r = {}
    r["A_symmetric"] = m(A - la.transpose(A))
    r["A_trace"] = m(la.tr(A) - 2.0)
    r["A_det"] = m(np.linalg.det(A))
    r["A_projector_form"] = m(A - (la.ID3 - nn))
    r["A_metric_form"] = m(A - giT @ la.flat_lift(frame.I) @ gti)
    r["B_symmetric"] = m(B - la.transpose(B))
    r["B_trace"] = m(la.tr(B) - 2.0 * frame.H)
    r["B_det"] = m(np.linalg.det(B))
    r["B_cofactor_trace"] = m(la.tr(la.cofactor(B)) - frame.K)
    r["B_cofactor"] = m(la.cofactor(B) - gt0 @ (K * la.E3E3) @ gti)
    r["B_second_form"] = m(B - giT @ la.flat_lift(frame.II) @ gti)
    r["B_weingarten_form"] = m(B - gt0 @ la.flat_lift(frame.L) @ gti)
    r["B_squared"] = m(B @ B - giT @ la.flat_lift(frame.III) @ gti)
    r["cayley_hamilton"] = m(B @ B - 2.0 * H * B + K * A)
    r["AB_equals_B"] = m(A @ B - B)
    r["BA_equals_B"] = m(B @ A - B)
    r["A_idempotent"] = m(A @ A - A)
    rng = np.random.default_rng(0) if rng is None else rng
    u = rng.standard_normal(frame.batch_shape + (3, 3))
    u[..., :, 2] = 0.0
    X = u @ gti
    r["tangential_right_invariance"] = m(X @ A - X)
    r["C_skew"] = m(C + la.transpose(C))
    r["C_squared"] = m(C @ C + A)
    r["C_rotated_form"] = m(C - frame.Q0 @ la.J2 @ la.transpose(frame.Q0))
    r["weingarten_relation"] = m(frame.grad_y0 @ frame.L + frame.grad_n0)
    r["third_form"] = m(frame.III - frame.II @ np.linalg.solve(frame.I, frame.II))
    r["Q0_director"] = m((frame.Q0 @ np.array([0.0, 0.0, 1.0])) - frame.n0)
    r["normal_orthogonality"] = m(np.einsum("...k,...ka->...a", frame.n0, frame.grad_y0))
    if dQ0 is not None:
        Q0 = frame.Q0
        cols = [la.axl_unchecked(la.skew(Q0.T @ dQ0[al])) for al in range(2)]
        W = np.stack([cols[0], cols[1], np.zeros(3)], axis=-1)
        r["B_rotation_gradient"] = m(B + C @ Q0 @ W @ gti)
    r["max"] = max(r.values())
    return r


def gkc_residual(frame: GeometryFrame, x3) -> float:
    grad, _, _ = theta_kinematics(frame, x3)
    e3 = np.array([0.0, 0.0, 1.0])
    return float(np.max(np.abs(la.transpose(grad) @ grad @ e3 - e3)))

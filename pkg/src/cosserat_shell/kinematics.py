"""Shell strain measures, thickness stretch, reconstructed strain and wryness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg3 as la
from .errors import Inadmissible, NotSkew, SingularSystem
from .geometry import GeometryFrame, inverse_factor, theta_kinematics, thickness_factor
from .material import MaterialParams

VARIANTS = ("approximate", "full")


@dataclass(frozen=True)
class ShellPointState:
    """Unknowns at one midsurface point: m, its gradient (3x2), the elastic rotation and its two derivatives."""

    m: np.ndarray
    grad_m: np.ndarray
    Qe: np.ndarray
    dQe: np.ndarray

    def check(self, tol: float = 1e-10) -> None:
        Q = self.Qe
        if np.max(np.abs(la.transpose(Q) @ Q - la.ID3)) > tol or np.any(np.linalg.det(Q) <= 0):
            raise ValueError("Qe is not a rotation")


def reference_state(frame: GeometryFrame) -> ShellPointState:
    """m = y0 and no elastic rotation."""
    shape = frame.batch_shape
    return ShellPointState(m=frame.y0.copy(), grad_m=frame.grad_y0.copy(),
                           Qe=np.broadcast_to(la.ID3, shape + (3, 3)).copy(),
                           dQe=np.zeros(shape + (2, 3, 3)))


@dataclass(frozen=True)
class StrainMeasures:
    E: np.ndarray
    Ke: np.ndarray
    CKe: np.ndarray
    rho_m: np.ndarray
    rho_b: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    G: np.ndarray
    T: np.ndarray
    R: np.ndarray
    N: np.ndarray
    variant: str = "approximate"


# ---------------------------------------------------------------------------
# array kernels (operators and indexing only, so jax arrays pass through)


def strain_kernel(grad_m, Qe, dQe, n0, gti, C, B, xp=np):
    """E, Ke, C Ke from point data. ``dQe`` has shape (..., 2, 3, 3)."""
    QT = Qe.swapaxes(-1, -2)
    qn = (Qe @ n0[..., :, None])
    E = QT @ xp.concatenate([grad_m, qn], axis=-1) @ gti - la.ID3
    k1 = la.axl_unchecked(la.skew(QT @ dQe[..., 0, :, :]))
    k2 = la.axl_unchecked(la.skew(QT @ dQe[..., 1, :, :]))
    Ke = xp.stack([k1, k2, 0.0 * k1], axis=-1) @ gti
    return E, Ke, C @ Ke


def rho_kernel(E, CKe, B, H, lam_ratio, variant: str = "approximate"):
    """Thickness-stretch coefficients (rho_m, rho_b)."""
    trE = la.tr(E)
    rho_m = 1.0 - lam_ratio * trE
    rho_b = -lam_ratio * la.tr(CKe + E @ B)
    if variant == "full":
        rho_b = rho_b + lam_ratio**2 * (la.tr(CKe) - 2.0 * H) * trE
    elif variant != "approximate":
        raise ValueError(f"variant must be one of {VARIANTS}")
    return rho_m, rho_b


def coupling_term(E, CKe, H, lam_ratio):
    """The product term kept by the full rho_b and dropped by the approximate one."""
    return lam_ratio**2 * (la.tr(CKe) - 2.0 * H) * la.tr(E)


# ---------------------------------------------------------------------------
# public point maps


def strain_measures(frame: GeometryFrame, state: ShellPointState, params: MaterialParams,
                    variant: str = "approximate", skew_tol: float = 1e-10) -> StrainMeasures:
    Qe = np.asarray(state.Qe, float)
    dQe = np.asarray(state.dQe, float)
    for al in range(2):
        W = la.transpose(Qe) @ dQe[..., al, :, :]
        scale = np.maximum(np.linalg.norm(W, axis=(-2, -1)), 1e-300)
        resid = np.linalg.norm(W + la.transpose(W), axis=(-2, -1))
        if np.any((resid > skew_tol * scale) & (resid > 0)):
            raise NotSkew(f"Qe^T d{al + 1}Qe is not skew (residual {np.max(resid / scale):.2e})")
    E, Ke, CKe = strain_kernel(np.asarray(state.grad_m, float), Qe, dQe, frame.n0,
                               frame.grad_theta0_inv, frame.C, frame.B)
    rho_m, rho_b = rho_kernel(E, CKe, frame.B, frame.H, params.lam_ratio, variant)
    A1 = 2.0 * frame.H * (1.0 - rho_m) + rho_b
    A2 = frame.K * (rho_m - 1.0) - 2.0 * frame.H * rho_b
    G, T, R, N = reduced_strains(frame, state)
    return StrainMeasures(E=E, Ke=Ke, CKe=CKe, rho_m=rho_m, rho_b=rho_b, A1=A1, A2=A2,
                          G=G, T=T, R=R, N=N, variant=variant)


def _grad_rotated_normal(frame: GeometryFrame, state: ShellPointState) -> np.ndarray:
    """grad(Qe n0) as a 3x2 matrix."""
    cols = [state.dQe[..., al, :, :] @ frame.n0[..., :, None] + state.Qe @ frame.grad_n0[..., :, al:al + 1]
            for al in range(2)]
    return np.concatenate(cols, axis=-1)


def reduced_strains(frame: GeometryFrame, state: ShellPointState):
    """Change of metric G, transverse shear T, bending strain R and drilling bendings N."""
    Q = state.Qe
    Qdy = Q @ frame.grad_y0
    Qn = (Q @ frame.n0[..., :, None])[..., 0]
    G = la.transpose(Qdy) @ state.grad_m - frame.I
    T = np.einsum("...k,...ka->...a", Qn, state.grad_m)
    R = -la.transpose(Qdy) @ _grad_rotated_normal(frame, state) - frame.II
    cols = [la.axl_unchecked(la.skew(la.transpose(Q) @ state.dQe[..., al, :, :])) for al in range(2)]
    N = np.stack([np.einsum("...k,...k->...", frame.n0, c) for c in cols], axis=-1)
    return G, T, R, N


def reconstructed_strain(frame: GeometryFrame, sm: StrainMeasures, x3) -> np.ndarray:
    """Strain through the thickness from the series coefficients of the reduced fields."""
    x3 = np.asarray(x3) + 0.0  # keeps extended precision inputs
    b = thickness_factor(frame, x3)
    if np.any(b <= 0):
        raise Inadmissible("1 - 2H x3 + K x3^2 is not positive")
    H = frame.H[..., None, None]
    nn = la.outer(frame.n0, frame.n0)
    s = lambda v: np.asarray(v)[..., None, None]  # noqa: E731
    P0 = sm.E + s(sm.rho_m - 1.0) * nn
    P1 = sm.E @ (frame.B - 2.0 * H * frame.A) + sm.CKe + s(sm.A1) * nn
    P2 = sm.CKe @ (frame.B - 2.0 * H * frame.A) + s(sm.A2) * nn
    P3 = s(frame.K * sm.rho_b) * nn
    x = x3[..., None, None]
    return (P0 + x * (P1 + x * (P2 + x * P3))) / b[..., None, None]


def reconstructed_strain_product(frame: GeometryFrame, state: ShellPointState, sm: StrainMeasures, x3) -> np.ndarray:
    """Same strain from the product form of the reconstructed deformation gradient."""
    x3 = np.asarray(x3, float)
    b = thickness_factor(frame, x3)
    Q = state.Qe
    qn = Q @ frame.n0[..., :, None]
    zero = np.zeros_like(qn)
    x = x3[..., None, None]
    first = (np.concatenate([state.grad_m, qn], axis=-1)
             + x * np.concatenate([_grad_rotated_normal(frame, state), zero], axis=-1)
             + np.asarray(sm.rho_m - 1.0 + x3 * sm.rho_b)[..., None, None]
             * np.concatenate([zero, zero, qn], axis=-1))
    F = first @ inverse_factor(frame, x3) @ frame.grad_theta0_inv / b[..., None, None]
    return la.transpose(Q) @ F - la.ID3


def wryness(frame: GeometryFrame, sm: StrainMeasures, x3) -> np.ndarray:
    x3 = np.asarray(x3) + 0.0  # keeps extended precision inputs
    b = thickness_factor(frame, x3)
    if np.any(b <= 0):
        raise Inadmissible("1 - 2H x3 + K x3^2 is not positive")
    x = x3[..., None, None]
    H = frame.H[..., None, None]
    return (sm.Ke + x * (sm.Ke @ frame.B - 2.0 * H * sm.Ke)) / b[..., None, None]


def wryness_chain_rule(frame: GeometryFrame, state: ShellPointState, x3) -> np.ndarray:
    """(axl(Q^T d1 Q) | axl(Q^T d2 Q) | 0) times the inverse of grad Theta(x3)."""
    _, _, inv = theta_kinematics(frame, x3)
    QT = la.transpose(state.Qe)
    cols = [la.axl_unchecked(la.skew(QT @ state.dQe[..., al, :, :])) for al in range(2)]
    W = np.stack([cols[0], cols[1], np.zeros_like(cols[0])], axis=-1)
    return W @ inv


def nye_convert(X, direction: str = "gamma_to_alpha") -> np.ndarray:
    """Nye's relation between wryness Gamma and dislocation density alpha."""
    X = np.asarray(X, float)
    t = la.tr(X)[..., None, None]
    if direction == "gamma_to_alpha":
        return -la.transpose(X) + t * la.ID3
    if direction == "alpha_to_gamma":
        return -la.transpose(X) + 0.5 * t * la.ID3
    raise ValueError("direction must be 'gamma_to_alpha' or 'alpha_to_gamma'")


def biot_stress(X, params: MaterialParams):
    """Biot-type stress of the non-symmetric stretch X = U - 1."""
    return (2.0 * params.mu * la.sym(X) + 2.0 * params.mu_c * la.skew(X)
            + params.lam * la.tr(X)[..., None, None] * la.ID3)


# ---------------------------------------------------------------------------
# plane stress


def ansatz_gradient(frame: GeometryFrame, state: ShellPointState, rho_m, rho_b, x3) -> np.ndarray:
    """Deformation gradient of the quadratic through-thickness ansatz, rho frozen at the point."""
    qn = state.Qe @ frame.n0[..., :, None]
    gq = _grad_rotated_normal(frame, state)
    zero = np.zeros_like(qn)
    x = np.asarray(x3, float)[..., None, None]
    rm = np.asarray(rho_m)[..., None, None]
    rb = np.asarray(rho_b)[..., None, None]
    return (np.concatenate([state.grad_m, rm * qn], axis=-1)
            + x * np.concatenate([rm * gq, rb * qn], axis=-1)
            + 0.5 * x**2 * np.concatenate([rb * gq, zero], axis=-1))


def normal_traction(frame: GeometryFrame, state: ShellPointState, params: MaterialParams, rho_m, rho_b, x3):
    """f(x3) = <T_Biot(U(x3) - 1) n0, n0> for the ansatz deformation."""
    _, _, inv = theta_kinematics(frame, x3)
    U = la.transpose(state.Qe) @ ansatz_gradient(frame, state, rho_m, rho_b, x3) @ inv
    T = biot_stress(U - la.ID3, params)
    return np.einsum("...i,...ij,...j->...", frame.n0, T, frame.n0)


def plane_stress_residuals(frame: GeometryFrame, state: ShellPointState, params: MaterialParams,
                           variant: str = "approximate", step: float | None = None):
    """(f(0), f'(0)) with f' from a Richardson-extrapolated central difference."""
    sm = strain_measures(frame, state, params, variant)
    f = lambda x3: normal_traction(frame, state, params, sm.rho_m, sm.rho_b, x3)  # noqa: E731
    d = params.h * 1e-4 if step is None else step
    c1 = (f(d) - f(-d)) / (2 * d)
    c2 = (f(0.5 * d) - f(-0.5 * d)) / d
    return f(0.0), (4.0 * c2 - c1) / 3.0


def dropped_coupling_term(frame: GeometryFrame, state: ShellPointState, params: MaterialParams):
    """Value of f'(0) under the approximate rho_b, in closed form."""
    sm = strain_measures(frame, state, params)
    return -(params.lam + 2 * params.mu) * coupling_term(sm.E, sm.CKe, frame.H, params.lam_ratio)


def rho_exact_neumann(frame: GeometryFrame, state: ShellPointState, params: MaterialParams, h: float,
                      tol: float = 1e-14):
    """Thickness stretch from zero normal traction imposed exactly on both faces x3 = +-h/2."""
    lam, mu = params.lam, params.mu
    c = lam + 2 * mu
    QT = la.transpose(state.Qe)
    zero = np.zeros(state.grad_m.shape[:-1] + (1,))
    Mq = QT @ np.concatenate([_grad_rotated_normal(frame, state), zero], axis=-1)
    Nm = QT @ np.concatenate([state.grad_m, zero], axis=-1)
    _, _, inv_p = theta_kinematics(frame, 0.5 * h)
    _, _, inv_m = theta_kinematics(frame, -0.5 * h)
    trMp, trMm = la.tr(Mq @ (inv_p + inv_m)), la.tr(Mq @ (inv_p - inv_m))
    trNp, trNm = la.tr(Nm @ (inv_p + inv_m)), la.tr(Nm @ (inv_p - inv_m))
    m_plus, m_minus = la.tr(Mq @ inv_p), la.tr(Mq @ inv_m)
    delta2 = 2 * c**2 + 0.75 * h * lam * c * trMm - 0.25 * h**2 * lam**2 * m_plus * m_minus
    if np.any(np.abs(delta2) <= tol * c**2):
        raise SingularSystem("thickness-stretch system is singular")
    rhs1 = 2 * c - lam * (trNp - 4.0)
    rhs2 = -lam * trNm
    rho_m = ((c + lam * h / 8 * trMm) * rhs1 - lam * h / 8 * trMp * rhs2) / delta2
    rho_b = (-0.5 * lam * trMp * rhs1 + (2 * c / h + 0.5 * lam * trMm) * rhs2) / delta2
    return rho_m, rho_b


def parallel_perp_split(X, frame: GeometryFrame):
    """(A X, (1 - A) X): tangential and normal parts."""
    Xpar = frame.A @ X
    return Xpar, X - Xpar

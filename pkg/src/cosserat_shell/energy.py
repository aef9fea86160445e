"""Quadratic energy forms, thickness series and the reduced shell densities.

The kernels here use only array operators, so they accept float64, long
double or jax arrays alike.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg3 as la
from .geometry import GeometryFrame
from .kinematics import StrainMeasures
from .material import MaterialParams

__all__ = [
    "MaterialParams", "EnergyBreakdown", "LoadResultants", "SeriesCoefficients", "SixParamCoefficients",
    "W_mp", "W_shell", "W_curv", "evaluate_form", "series_coefficients", "inv_b_series",
    "combination_identities", "reduced_density", "reduced_density_kernel", "reduced_density_raw",
    "plate_density", "load_potential", "identify_coefficients", "wp_density", "wep_density",
    "w_our_density", "sixparam_density", "split_form_check",
]


# ---------------------------------------------------------------------------
# bilinear forms


def W_mp(X, Y, p: MaterialParams):
    return (p.mu * la.inner(la.sym(X), la.sym(Y)) + p.mu_c * la.inner(la.skew(X), la.skew(Y))
            + 0.5 * p.lam * la.tr(X) * la.tr(Y))


def W_shell(X, Y, p: MaterialParams):
    return (p.mu * la.inner(la.sym(X), la.sym(Y)) + p.mu_c * la.inner(la.skew(X), la.skew(Y))
            + p.shell_lam * la.tr(X) * la.tr(Y))


def W_curv(X, Y, p: MaterialParams):
    dX = la.dev(la.sym(X))
    dY = la.dev(la.sym(Y))
    return p.mu * p.L_c**2 * (p.b1 * la.inner(dX, dY) + p.b2 * la.inner(la.skew(X), la.skew(Y))
                              + 4.0 * p.b3 * la.tr(X) * la.tr(Y))


_FORMS = {"Wmp": W_mp, "Wshell": W_shell, "Wcurv": W_curv}


def evaluate_form(form: str, X, Y=None, params: MaterialParams | None = None):
    """Value of a named bilinear form; the quadratic form when Y is omitted."""
    if params is None:
        raise ValueError("params are required")
    try:
        fn = _FORMS[form]
    except KeyError:
        raise ValueError(f"unknown form {form!r}; expected one of {sorted(_FORMS)}") from None
    return fn(X, X if Y is None else Y, params)


# ---------------------------------------------------------------------------
# thickness series


def inv_b_series(H, K, order: int = 4) -> list:
    """Taylor coefficients of 1/(1 - 2H x + K x^2) up to x^order."""
    c = [1.0 + 0.0 * H, 2.0 * H]
    while len(c) <= order:
        c.append(2.0 * H * c[-1] - K * c[-2])
    return c[: order + 1]


@dataclass(frozen=True)
class SeriesCoefficients:
    C: tuple
    C_simplified: tuple
    D: tuple


def _series_terms(frame: GeometryFrame, sm: StrainMeasures):
    H = frame.H[..., None, None]
    nn = la.outer(frame.n0, frame.n0)
    s = lambda v: np.asarray(v)[..., None, None]  # noqa: E731
    P0 = sm.E + s(sm.rho_m - 1.0) * nn
    P1 = sm.E @ frame.B + sm.CKe - 2.0 * H * sm.E + s(sm.A1) * nn
    P2 = sm.CKe @ frame.B - 2.0 * H * sm.CKe + s(sm.A2) * nn
    P3 = s(frame.K * sm.rho_b) * nn
    return P0, P1, P2, P3


def series_coefficients(frame: GeometryFrame, sm: StrainMeasures, params: MaterialParams) -> SeriesCoefficients:
    """Coefficients C_k of b^2 Wmp(strain(x3)) and D_k of b^2 Wcurv(wryness(x3)) as polynomials in x3."""
    W = lambda X, Y: W_mp(X, Y, params)  # noqa: E731
    P0, P1, P2, P3 = _series_terms(frame, sm)
    C = (W(P0, P0), 2 * W(P0, P1), W(P1, P1) + 2 * W(P0, P2), 2 * W(P0, P3) + 2 * W(P1, P2),
         W(P2, P2) + 2 * W(P1, P3), 2 * W(P2, P3), W(P3, P3))
    Ws = lambda X, Y: W_shell(X, Y, params)  # noqa: E731
    H = frame.H[..., None, None]
    E, CK, B = sm.E, sm.CKe, frame.B
    S1 = E @ B + CK - 2.0 * H * E
    S2 = CK @ B - 2.0 * H * CK
    trSB = la.tr((E @ B + CK) @ B)
    Cs = (Ws(E, E), 2 * Ws(E, S1), Ws(S1, S1) + 2 * Ws(E, S2), 2 * Ws(S1, S2),
          Ws(S2, S2) + params.lam**2 / (2 * (params.lam + 2 * params.mu)) * trSB**2)
    Wc = lambda X, Y: W_curv(X, Y, params)  # noqa: E731
    Kb = sm.Ke @ B - 2.0 * H * sm.Ke
    D = (Wc(sm.Ke, sm.Ke), 2 * Wc(sm.Ke, Kb), Wc(Kb, Kb))
    return SeriesCoefficients(C=C, C_simplified=Cs, D=D)


def combination_identities(frame: GeometryFrame, sm: StrainMeasures, params: MaterialParams) -> dict:
    """Residuals of the x3^2 and x3^4 coefficient identities behind the closed-form integration."""
    sc = series_coefficients(frame, sm, params)
    H, K = frame.H, frame.K
    c = inv_b_series(H, K, 4)
    C, D = sc.C, sc.D
    E, CK, B, Ke = sm.E, sm.CKe, frame.B, sm.Ke
    Hm = H[..., None, None]
    S = E @ B + CK
    Ws = lambda X, Y: W_shell(X, Y, params)  # noqa: E731
    Wc = lambda X, Y: W_curv(X, Y, params)  # noqa: E731
    lhs2 = c[2] * C[0] + c[1] * C[1] + C[2]
    rhs2 = -K * Ws(E, E) + Ws(S, S) + 2 * Ws(E, CK @ B - 2 * Hm * CK)
    lhs4 = c[4] * C[0] + c[3] * C[1] + c[2] * C[2] + c[1] * C[3] + C[4]
    rhs4 = -K * Ws(S, S) + W_mp(S @ B, S @ B, params)
    dl2 = c[2] * D[0] + c[1] * D[1] + D[2]
    dr2 = -K * Wc(Ke, Ke) + Wc(Ke @ B, Ke @ B)
    dl4 = c[4] * D[0] + c[3] * D[1] + c[2] * D[2]
    dr4 = -K * Wc(Ke @ B, Ke @ B) + Wc(Ke @ B @ B, Ke @ B @ B)
    r = {f"simplified_C{k}": float(np.max(np.abs(sc.C[k] - sc.C_simplified[k]))) for k in range(5)}
    r["membrane_x2"] = float(np.max(np.abs(lhs2 - rhs2)))
    r["membrane_x4"] = float(np.max(np.abs(lhs4 - rhs4)))
    r["curvature_x2"] = float(np.max(np.abs(dl2 - dr2)))
    r["curvature_x4"] = float(np.max(np.abs(dl4 - dr4)))
    r["max"] = max(r.values())
    return r


# ---------------------------------------------------------------------------
# reduced densities


@dataclass(frozen=True)
class EnergyBreakdown:
    memb: np.ndarray
    memb_bend: np.ndarray
    bend_curv: np.ndarray
    area_element: np.ndarray
    load: np.ndarray
    total: np.ndarray


def reduced_density_kernel(E, Ke, CKe, B, H, K, p: MaterialParams):
    """(membrane, membrane-bending, bending-curvature) densities per unit parameter area, before det0."""
    h = p.h
    S = E @ B + CKe
    SB = S @ B
    KB = Ke @ B
    memb = (h + K * h**3 / 12) * W_shell(E, E, p)
    memb_bend = ((h**3 / 12 - K * h**5 / 80) * W_shell(S, S, p) - (h**3 / 3) * H * W_shell(E, S, p)
                 + (h**3 / 6) * W_shell(E, SB, p) + (h**5 / 80) * W_mp(SB, SB, p))
    bend_curv = ((h - K * h**3 / 12) * W_curv(Ke, Ke, p) + (h**3 / 12 - K * h**5 / 80) * W_curv(KB, KB, p)
                 + (h**5 / 80) * W_curv(KB @ B, KB @ B, p))
    return memb, memb_bend, bend_curv


def reduced_density(frame: GeometryFrame, sm: StrainMeasures, params: MaterialParams) -> EnergyBreakdown:
    memb, mb, bc = reduced_density_kernel(sm.E, sm.Ke, sm.CKe, frame.B, frame.H, frame.K, params)
    zero = np.zeros_like(np.asarray(memb))
    return EnergyBreakdown(memb=memb, memb_bend=mb, bend_curv=bc, area_element=frame.det0,
                           load=zero, total=memb + mb + bc)


def reduced_density_raw(frame: GeometryFrame, sm: StrainMeasures, params: MaterialParams):
    """Total reduced density in the form before the mixed terms are rewritten."""
    h = params.h
    E, CK, B, K = sm.E, sm.CKe, frame.B, frame.K
    Hm = frame.H[..., None, None]
    S = E @ B + CK
    memb = ((h - K * h**3 / 12) * W_shell(E, E, params) + (h**3 / 12 - K * h**5 / 80) * W_shell(S, S, params)
            + (h**3 / 6) * W_shell(E, CK @ B - 2 * Hm * CK, params) + (h**5 / 80) * W_mp(S @ B, S @ B, params))
    D = series_coefficients(frame, sm, params).D
    c = inv_b_series(frame.H, K, 4)
    curv = (h * D[0] + h**3 / 12 * (c[2] * D[0] + c[1] * D[1] + D[2])
            + h**5 / 80 * (c[4] * D[0] + c[3] * D[1] + c[2] * D[2]))
    return memb + curv


def plate_density(sm: StrainMeasures, params: MaterialParams):
    """Flat-midsurface densities (membrane, membrane-bending, bending-curvature)."""
    h = params.h
    JK = la.J2 @ sm.Ke
    return (h * W_shell(sm.E, sm.E, params), h**3 / 12 * W_shell(JK, JK, params),
            h * W_curv(sm.Ke, sm.Ke, params))


# ---------------------------------------------------------------------------
# loads


@dataclass(frozen=True)
class LoadResultants:
    f_bar: np.ndarray = np.zeros(3)
    t_bar: np.ndarray = np.zeros(3)
    c_omega: np.ndarray = np.zeros(3)
    c_gamma: np.ndarray = np.zeros(3)


def load_potential(res: LoadResultants, m, y0, Qe, n0, edge: bool = False):
    """Dead-load work density: on the surface by default, on the traction edge with ``edge=True``."""
    force, couple = (res.t_bar, res.c_gamma) if edge else (res.f_bar, res.c_omega)
    u = m - y0
    turned = (Qe @ n0[..., :, None])[..., 0] - n0
    return (u * force).sum(axis=-1) + (turned * couple).sum(axis=-1)


# ---------------------------------------------------------------------------
# comparison with six-parameter shell energies


@dataclass(frozen=True)
class SixParamCoefficients:
    alpha: tuple
    beta: tuple
    mu_c_drill: float


def identify_coefficients(params: MaterialParams, K_gauss) -> SixParamCoefficients:
    p = params
    h = p.h
    pref = h + K_gauss * h**3 / 12
    cpref = h - K_gauss * h**3 / 12
    mlc = p.mu * p.L_c**2
    alpha = (pref * 2 * p.mu * p.lam / (2 * p.mu + p.lam), pref * (p.mu - p.mu_c),
             pref * (p.mu + p.mu_c), pref * (p.mu + p.mu_c))
    beta = (2 * cpref * mlc * (12 * p.b3 - p.b1) / 3, cpref * mlc * (p.b1 - p.b2),
            cpref * mlc * (p.b1 + p.b2), cpref * mlc * (p.b1 + p.b2))
    return SixParamCoefficients(alpha=alpha, beta=beta, mu_c_drill=2 * pref * p.mu_c)


def _ep_part(X, n0, A, c):
    Xp = A @ X
    Xn = (la.transpose(X) @ n0[..., :, None])[..., 0]
    return 0.5 * (c[0] * la.tr(Xp) ** 2 + c[1] * la.tr(Xp @ Xp) + c[2] * la.tr(la.transpose(Xp) @ Xp)
                  + c[3] * (Xn * Xn).sum(axis=-1))


def wep_density(E, Ke, frame: GeometryFrame, coeffs: SixParamCoefficients):
    return _ep_part(E, frame.n0, frame.A, coeffs.alpha) + _ep_part(Ke, frame.n0, frame.A, coeffs.beta)


def wp_density(E, Ke, frame: GeometryFrame, params: MaterialParams, alpha_s: float = 5 / 6,
               alpha_t: float = 7 / 10):
    lam, mu, h = params.lam, params.mu, params.h
    young = mu * (3 * lam + 2 * mu) / (lam + mu)
    nu = lam / (2 * (lam + mu))
    Cs = young * h / (1 - nu**2)
    Db = young * h**3 / (12 * (1 - nu**2))

    def part(X, k, shear):
        Xp = frame.A @ X
        Xn = (la.transpose(X) @ frame.n0[..., :, None])[..., 0]
        return k * (nu * la.tr(Xp) ** 2 + (1 - nu) * la.tr(la.transpose(Xp) @ Xp)) \
            + shear * k * (1 - nu) * (Xn * Xn).sum(axis=-1)

    return 0.5 * (part(E, Cs, alpha_s) + part(Ke, Db, alpha_t))


def w_our_density(E, Ke, frame: GeometryFrame, params: MaterialParams):
    h, K = params.h, frame.K
    return (h + K * h**3 / 12) * W_shell(E, E, params) + (h - K * h**3 / 12) * W_curv(Ke, Ke, params)


def sixparam_density(sm: StrainMeasures, frame: GeometryFrame, model: str, params: MaterialParams,
                     alpha_s: float = 5 / 6, alpha_t: float = 7 / 10, coeffs: SixParamCoefficients | None = None):
    if model == "WP":
        return wp_density(sm.E, sm.Ke, frame, params, alpha_s, alpha_t)
    if model == "WEP":
        coeffs = identify_coefficients(params, frame.K) if coeffs is None else coeffs
        return wep_density(sm.E, sm.Ke, frame, coeffs)
    raise ValueError("model must be 'WP' or 'WEP'")


def split_form_check(X, frame: GeometryFrame, params: MaterialParams) -> dict:
    """Residuals of the tangential/normal split of Wshell and Wcurv for X = (*|*|0) grad Theta0^-1."""
    p = params
    Xp = frame.A @ X
    Xq = X - Xp
    nperp = la.sqnorm(Xq)
    ws = (p.mu * la.sqnorm(la.sym(Xp)) + p.mu_c * la.sqnorm(la.skew(Xp))
          + p.shell_lam * la.tr(Xp) ** 2 + 0.5 * (p.mu + p.mu_c) * nperp)
    wc = p.mu * p.L_c**2 * (p.b1 * la.sqnorm(la.sym(Xp)) + p.b2 * la.sqnorm(la.skew(Xp))
                            + 0.5 * (p.b1 + p.b2) * nperp + (12 * p.b3 - p.b1) / 3 * la.tr(X) ** 2)
    Xn = (la.transpose(X) @ frame.n0[..., :, None])[..., 0]
    r = {
        "shell_split": float(np.max(np.abs(W_shell(X, X, p) - ws))),
        "curv_split": float(np.max(np.abs(W_curv(X, X, p) - wc))),
        "perp_norm": float(np.max(np.abs(nperp - (Xn * Xn).sum(axis=-1)))),
        "perp_trace": float(np.max(np.abs(la.tr(Xq)))),
        "orthogonality": float(np.max(np.abs(la.inner(Xp, Xq)))),
    }
    r["max"] = max(r.values())
    return r

"""Identity suites shared by the ``verify`` command and the acceptance tests.

Each suite samples random parameter points (and random states where needed)
and reports the worst residual together with the point where it occurred.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import energy as en
from . import geometry as geo
from . import kinematics as kin
from . import linalg3 as la
from .material import MaterialParams
from .quaternion import quat_to_mat


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_residual: float
    worst_point: tuple
    tol: float
    samples: int

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_residual) and self.max_residual < self.tol)

    def as_dict(self) -> dict:
        return {"name": self.name, "max_residual": self.max_residual, "tol": self.tol,
                "worst_point": list(self.worst_point), "samples": self.samples, "pass": self.passed}


def sample_points(surface: geo.Surface, n: int, rng, margin: float = 0.05):
    """n uniform points inside the parameter domain, kept ``margin`` (relative) away from its edges."""
    (a1, b1), (a2, b2) = surface.domain
    u = margin + (1 - 2 * margin) * rng.random((n, 2))
    return a1 + (b1 - a1) * u[:, 0], a2 + (b2 - a2) * u[:, 1]


def random_state(frame: geo.GeometryFrame, rng, scale: float = 0.1) -> kin.ShellPointState:
    """Pointwise state near the reference: perturbed grad m, random rotation, random skew derivatives."""
    shape = frame.batch_shape
    q = rng.standard_normal(shape + (4,))
    Q = quat_to_mat(q)
    dQ = np.stack([Q @ la.anti(rng.standard_normal(shape + (3,))) for _ in range(2)], axis=-3)
    m = frame.y0 + scale * rng.standard_normal(shape + (3,))
    grad_m = frame.grad_y0 + scale * rng.standard_normal(shape + (3, 2))
    return kin.ShellPointState(m=m, grad_m=grad_m, Qe=Q, dQe=dQ)


def safe_thickness(frame: geo.GeometryFrame, h: float, factor: float = 0.45) -> float:
    """h reduced if needed so that h |kappa| stays below ``factor``."""
    _, k1, k2 = geo.admissibility_check(frame, h)
    kmax = float(np.max(np.maximum(np.abs(k1), np.abs(k2))))
    return h if kmax * h < factor else factor / kmax


def _worst(values, x1, x2):
    values = np.asarray(values, float).reshape(len(x1), -1).max(axis=-1)
    k = int(np.argmax(values))
    return float(values[k]), (float(x1[k]), float(x2[k]))


def _per_point_max(X):
    X = np.abs(np.asarray(X, float))
    return X.reshape(X.shape[0], -1).max(axis=-1)


# ---------------------------------------------------------------------------


def geometry_suite(surface: geo.Surface, rng, n: int = 64, tol: float | None = None,
                   rotation_tol: float = 1e-6) -> list[SuiteResult]:
    x1, x2 = sample_points(surface, n, rng)
    tol = (1e-9 if surface.mode == "analytic" else 1e-6) if tol is None else tol
    alg, rot = np.zeros(n), np.zeros(n)
    for k in range(n):
        f = geo.frame_at(surface, x1[k], x2[k])
        dQ0 = geo.q0_derivatives(surface, x1[k], x2[k])
        r = geo.curvature_tensor_identities(f, dQ0=dQ0, rng=rng)
        rot[k] = r.pop("B_rotation_gradient")
        r.pop("max")
        alg[k] = max(r.values())
    out = [SuiteResult("geometry_identities", *_worst(alg, x1, x2), samples=n, tol=tol)]
    out.append(SuiteResult("geometry_rotation_gradient", *_worst(rot, x1, x2), samples=n, tol=rotation_tol))
    return out


def theta_suite(surface: geo.Surface, params: MaterialParams, rng, n: int = 1000, tol: float = 1e-12):
    x1, x2 = sample_points(surface, n, rng)
    f = geo.frame_at(surface, x1, x2)
    h = safe_thickness(f, params.h)
    x3 = (rng.random(n) - 0.5) * h
    grad, det, inv = geo.theta_kinematics(f, x3, h)
    det_ref = np.linalg.det(grad)
    inv_ref = np.linalg.inv(grad)
    r_det = np.abs(det - det_ref) / np.abs(det_ref)
    r_inv = np.linalg.norm(inv - inv_ref, axis=(-2, -1)) / np.linalg.norm(inv_ref, axis=(-2, -1))
    return [SuiteResult("theta_determinant", *_worst(r_det, x1, x2), tol=tol, samples=n),
            SuiteResult("theta_inverse", *_worst(r_inv, x1, x2), tol=tol, samples=n)]


def gkc_suite(surface: geo.Surface, params: MaterialParams, rng, n: int = 64, tol: float = 1e-12):
    x1, x2 = sample_points(surface, n, rng)
    f = geo.frame_at(surface, x1, x2)
    h = safe_thickness(f, params.h)
    x3 = (rng.random(n) - 0.5) * h
    grad, _, _ = geo.theta_kinematics(f, x3)
    e3 = np.array([0.0, 0.0, 1.0])
    r = _per_point_max(la.transpose(grad) @ grad @ e3 - e3)
    return [SuiteResult("kirchhoff_constraint", *_worst(r, x1, x2), tol=tol, samples=n)]


def nye_suite(rng, n: int = 1000, tol: float = 1e-13):
    X = rng.standard_normal((n, 3, 3))
    alpha = kin.nye_convert(X, "gamma_to_alpha")
    back = kin.nye_convert(alpha, "alpha_to_gamma")
    rt = _per_point_max(back - X)
    trace = np.abs(la.tr(alpha) - 2 * la.tr(X))
    idx = np.arange(n, dtype=float)
    return [SuiteResult("nye_round_trip", *_worst(rt, idx, idx), tol=tol, samples=n),
            SuiteResult("nye_trace_relation", *_worst(trace, idx, idx), tol=tol, samples=n)]


def reference_suite(surface: geo.Surface, params: MaterialParams, rng, n: int = 64, tol: float = 1e-12):
    x1, x2 = sample_points(surface, n, rng)
    f = geo.frame_at(surface, x1, x2)
    p = params.with_thickness(safe_thickness(f, params.h))
    sm = kin.strain_measures(f, kin.reference_state(f), p)
    eb = en.reduced_density(f, sm, p)
    r = np.max(np.stack([_per_point_max(sm.E), _per_point_max(sm.Ke), np.abs(sm.rho_m - 1), np.abs(sm.rho_b),
                         np.abs(eb.memb), np.abs(eb.memb_bend), np.abs(eb.bend_curv)]), axis=0)
    return [SuiteResult("reference_state", *_worst(r, x1, x2), tol=tol, samples=n)]


def reconstruction_suite(surface: geo.Surface, params: MaterialParams, rng, n: int = 100, tol: float = 1e-10):
    x1, x2 = sample_points(surface, n, rng)
    f = geo.frame_at(surface, x1, x2)
    h = safe_thickness(f, params.h)
    p = params.with_thickness(h)
    st = random_state(f, rng)
    sm = kin.strain_measures(f, st, p)
    rs, rg = np.zeros(n), np.zeros(n)
    for x3 in np.linspace(-0.5 * h, 0.5 * h, 7):
        x = np.full(n, x3)
        rs = np.maximum(rs, _per_point_max(kin.reconstructed_strain(f, sm, x)
                                           - kin.reconstructed_strain_product(f, st, sm, x)))
        rg = np.maximum(rg, _per_point_max(kin.wryness(f, sm, x) - kin.wryness_chain_rule(f, st, x)))
    return [SuiteResult("strain_reconstruction", *_worst(rs, x1, x2), tol=tol, samples=n),
            SuiteResult("wryness_reconstruction", *_worst(rg, x1, x2), tol=tol, samples=n)]


def plane_stress_suite(surface: geo.Surface, params: MaterialParams, rng, n: int = 100,
                       tol_f0: float = 1e-10, tol_df: float = 1e-5, tol_dropped: float = 1e-6):
    x1, x2 = sample_points(surface, n, rng)
    f = geo.frame_at(surface, x1, x2)
    p = params.with_thickness(safe_thickness(f, params.h))
    st = random_state(f, rng)
    f0, df = kin.plane_stress_residuals(f, st, p, "full")
    _, dfa = kin.plane_stress_residuals(f, st, p, "approximate")
    dropped = kin.dropped_coupling_term(f, st, p)
    return [SuiteResult("plane_stress_f0", *_worst(np.abs(f0), x1, x2), tol=tol_f0, samples=n),
            SuiteResult("plane_stress_df0", *_worst(np.abs(df), x1, x2), tol=tol_df, samples=n),
            SuiteResult("plane_stress_dropped_term", *_worst(np.abs(dfa - dropped), x1, x2),
                        tol=tol_dropped, samples=n)]


def series_suite(surface: geo.Surface, params: MaterialParams, rng, n: int = 100, tol: float = 1e-10):
    x1, x2 = sample_points(surface, n, rng)
    worst = {}
    for k in range(n):
        f = geo.frame_at(surface, x1[k], x2[k])
        sm = kin.strain_measures(f, random_state(f, rng), params)
        r = en.combination_identities(f, sm, params)
        fb = en.W_mp(sm.E, sm.CKe, params) - en.W_shell(sm.E, sm.CKe, params) \
            - params.lam**2 / (2 * (params.lam + 2 * params.mu)) * la.tr(sm.E) * la.tr(sm.CKe)
        r["form_relation"] = abs(float(fb))
        r["density_forms"] = abs(float(en.reduced_density(f, sm, params).total - en.reduced_density_raw(f, sm, params)))
        r.pop("max")
        for key, v in r.items():
            if v >= worst.get(key, (-1.0,))[0]:
                worst[key] = (v, (float(x1[k]), float(x2[k])))
    res = max(worst.items(), key=lambda kv: kv[1][0])
    return [SuiteResult(f"series_identities[{res[0]}]", res[1][0], res[1][1], tol, n)]


def split_suite(surface: geo.Surface, params: MaterialParams, rng, n: int = 100, tol: float = 1e-12):
    x1, x2 = sample_points(surface, n, rng)
    f = geo.frame_at(surface, x1, x2)

    def tangential():
        u = rng.standard_normal((n, 3, 3))
        u[..., :, 2] = 0.0
        return u @ f.grad_theta0_inv

    E, Ke = tangential(), tangential()
    split = np.array([en.split_form_check(E[k], f[k], params)["max"] for k in range(n)])
    coeffs = en.identify_coefficients(params, f.K)
    ours = en.w_our_density(E, Ke, f, params)
    ep = en.wep_density(E, Ke, f, coeffs)
    rel = np.abs(ours - ep) / np.maximum(np.abs(ours), 1e-300)
    drill = np.abs(coeffs.mu_c_drill - 2 * (params.h + f.K * params.h**3 / 12) * params.mu_c)
    return [SuiteResult("split_forms", *_worst(split, x1, x2), tol=tol, samples=n),
            SuiteResult("six_parameter_identification", *_worst(rel, x1, x2), tol=tol, samples=n),
            SuiteResult("drilling_modulus", *_worst(drill, x1, x2), tol=tol, samples=n)]


def run_all(surface: geo.Surface, params: MaterialParams, rng, samples: int = 64, tol: float | None = None):
    """Every suite in a fixed order; ``tol`` overrides all tolerances when given."""
    results = []
    results += geometry_suite(surface, rng, samples)
    results += theta_suite(surface, params, rng, max(samples, 1000))
    results += nye_suite(rng, max(samples, 1000))
    results += gkc_suite(surface, params, rng, samples)
    results += reference_suite(surface, params, rng, samples)
    results += reconstruction_suite(surface, params, rng, samples)
    results += plane_stress_suite(surface, params, rng, samples)
    results += series_suite(surface, params, rng, samples)
    results += split_suite(surface, params, rng, samples)
    if tol is not None:
        results = [SuiteResult(r.name, r.max_residual, r.worst_point, tol, r.samples) for r in results]
    return results

"""Through-thickness quadrature of the unreduced energy, used to certify the reduced densities.

Both integrators share the same surface quadrature, so their difference is
the quadrature of the pointwise thickness-integration error. Because that
error is O(h^7) it drops below double-precision rounding of the energy itself
for thin shells; the final evaluation therefore runs in long double on the
same (double precision) strain inputs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .energy import W_curv, W_mp, reduced_density_kernel
from .errors import ConfigError, Inadmissible
from .geometry import GeometryFrame, Surface, _FRAME_ARRAYS, admissibility_check, frame_at
from .kinematics import ShellPointState, reference_state, StrainMeasures, reconstructed_strain, strain_measures, wryness
from .material import MaterialParams
from .quaternion import quat_to_mat, quat_to_mat_derivative

StateField = Callable[[GeometryFrame], ShellPointState]


@dataclass(frozen=True)
class QuadratureSpec:
    n_gauss_x3: int = 8
    n_cells: tuple = (4, 4)
    n_gauss_cell: int = 3
    extended_precision: bool = True

    def __post_init__(self):
        if self.n_gauss_x3 < 6:
            raise ConfigError("n_gauss_x3 must be at least 6")
        if self.n_gauss_cell not in (2, 3):
            raise ConfigError("n_gauss_cell must be 2 or 3")
        if len(self.n_cells) != 2 or min(self.n_cells) < 1:
            raise ConfigError("n_cells must be two positive integers")

    @property
    def dtype(self):
        return np.longdouble if self.extended_precision else np.float64


def gauss_legendre(n: int, dtype=np.float64):
    """Gauss-Legendre nodes and weights on [-1, 1], Newton-polished in ``dtype``."""
    x0, _ = np.polynomial.legendre.leggauss(n)
    x = x0.astype(dtype)

    def legendre(x):
        p0, p1 = np.ones_like(x), x
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        return p1, n * (x * p1 - p0) / (x * x - 1)

    for _ in range(3):
        p, dp = legendre(x)
        x = x - p / dp
    _, dp = legendre(x)
    return x, 2 / ((1 - x * x) * dp * dp)


def surface_rule(surface: Surface, spec: QuadratureSpec):
    """Points (x1, x2) and weights of the cell-wise tensor Gauss rule over the parameter domain."""
    (a1, b1), (a2, b2) = surface.domain
    t, w = gauss_legendre(spec.n_gauss_cell)
    axes = []
    for (a, b), n in (((a1, b1), spec.n_cells[0]), ((a2, b2), spec.n_cells[1])):
        edges = np.linspace(a, b, n + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        axes.append(((mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()))
    (p1, w1), (p2, w2) = axes
    X1, X2 = np.meshgrid(p1, p2, indexing="ij")
    return X1.ravel(), X2.ravel(), np.outer(w1, w2).ravel()


def _promote(obj, dtype):
    """Copy of a frame or strain record with every float array cast to ``dtype``."""
    names = _FRAME_ARRAYS if isinstance(obj, GeometryFrame) else [
        f.name for f in dataclasses.fields(obj) if f.name != "variant"]
    return dataclasses.replace(obj, **{n: np.asarray(getattr(obj, n)).astype(dtype) for n in names})


def _prepare(surface: Surface, state_field: StateField, params: MaterialParams, spec: QuadratureSpec):
    x1, x2, w = surface_rule(surface, spec)
    frame = frame_at(surface, x1, x2)
    ok, _, _ = admissibility_check(frame, params.h)
    if not ok:
        raise Inadmissible(f"thickness h={params.h} violates h|kappa| < 1/2 at a quadrature point")
    sm = strain_measures(frame, state_field(frame), params, variant="approximate")
    dt = spec.dtype
    return _promote(frame, dt), _promote(sm, dt), w.astype(dt)


def _sum(v) -> float:
    # contiguous pairwise summation, fixed order
    return float(np.sum(np.ascontiguousarray(v).ravel()))


def volume_density(frame: GeometryFrame, sm: StrainMeasures, params: MaterialParams, spec: QuadratureSpec):
    """Thickness integral of [Wmp(strain) + Wcurv(wryness)] det grad Theta at each surface point."""
    t, wt = gauss_legendre(spec.n_gauss_x3, spec.dtype)
    half = spec.dtype(params.h) / 2
    acc = []
    for ti, wi in zip(t, wt):
        x3 = half * ti
        Et = reconstructed_strain(frame, sm, x3)
        Gt = wryness(frame, sm, x3)
        det = frame.det0 * (1 - 2 * frame.H * x3 + frame.K * x3 * x3)
        acc.append(half * wi * (W_mp(Et, Et, params) + W_curv(Gt, Gt, params)) * det)
    return np.sum(np.stack(acc), axis=0)


def reduced_point_density(frame: GeometryFrame, sm: StrainMeasures, params: MaterialParams):
    memb, mb, bc = reduced_density_kernel(sm.E, sm.Ke, sm.CKe, frame.B, frame.H, frame.K, params)
    return (memb + mb + bc) * frame.det0


def integrate_volume(surface: Surface, state_field: StateField, params: MaterialParams,
                     spec: QuadratureSpec = QuadratureSpec()) -> float:
    frame, sm, w = _prepare(surface, state_field, params, spec)
    return _sum(w * volume_density(frame, sm, params, spec))


def integrate_reduced(surface: Surface, state_field: StateField, params: MaterialParams,
                      spec: QuadratureSpec = QuadratureSpec()) -> float:
    frame, sm, w = _prepare(surface, state_field, params, spec)
    return _sum(w * reduced_point_density(frame, sm, params))


@dataclass(frozen=True)
class ConvergenceResult:
    h: np.ndarray
    volume: np.ndarray
    reduced: np.ndarray
    residuals: np.ndarray
    slope: float


def convergence_study(surface: Surface, state_field: StateField, params: MaterialParams, h_list,
                      spec: QuadratureSpec = QuadratureSpec()) -> ConvergenceResult:
    vol, red, res = [], [], []
    for h in h_list:
        p = params.with_thickness(float(h))
        frame, sm, w = _prepare(surface, state_field, p, spec)
        v = w * volume_density(frame, sm, p, spec)
        r = w * reduced_point_density(frame, sm, p)
        vol.append(_sum(v))
        red.append(_sum(r))
        res.append(abs(_sum(v - r)))
    h = np.asarray(h_list, float)
    res = np.asarray(res)
    slope = float(np.polyfit(np.log(h), np.log(res), 1)[0]) if len(h) > 1 and np.all(res > 0) else float("nan")
    return ConvergenceResult(h=h, volume=np.asarray(vol), reduced=np.asarray(red), residuals=res, slope=slope)


# ---------------------------------------------------------------------------
# synthetic smooth states


@dataclass(frozen=True)
class SyntheticField:
    """Seeded smooth state: quadratic polynomial perturbation of y0 and a rotation field q ~ (1, w(x)).

    ``w`` is quadratic in (x1, x2); the homogeneous quaternion map turns it into
    a smooth rotation with closed-form derivatives.
    """

    seed: int = 0
    amp_m: float = 0.05
    amp_q: float = 0.1
    center: tuple = (0.0, 0.0)

    def _coeffs(self):
        rng = np.random.Generator(np.random.Philox(self.seed))
        return rng.standard_normal((6, 3)), rng.standard_normal((6, 3))

    @staticmethod
    def _basis(x1, x2):
        one = np.ones_like(x1)
        zero = np.zeros_like(x1)
        val = np.stack([one, x1, x2, x1 * x1, x1 * x2, x2 * x2], axis=-1)
        d1 = np.stack([zero, one, zero, 2 * x1, x2, zero], axis=-1)
        d2 = np.stack([zero, zero, one, zero, x1, 2 * x2], axis=-1)
        return val, d1, d2

    def __call__(self, frame: GeometryFrame) -> ShellPointState:
        cm, cq = self._coeffs()
        x1 = frame.x[..., 0] - self.center[0]
        x2 = frame.x[..., 1] - self.center[1]
        val, d1, d2 = self._basis(x1, x2)
        m = frame.y0 + self.amp_m * val @ cm
        grad_m = frame.grad_y0 + self.amp_m * np.stack([d1 @ cm, d2 @ cm], axis=-1)
        one = np.ones(x1.shape + (1,))
        q = np.concatenate([one, self.amp_q * val @ cq], axis=-1)
        dq = [np.concatenate([0 * one, self.amp_q * d @ cq], axis=-1) for d in (d1, d2)]
        Q = quat_to_mat(q)
        dQ = np.stack([quat_to_mat_derivative(q, d) for d in dq], axis=-3)
        return ShellPointState(m=m, grad_m=grad_m, Qe=Q, dQe=dQ)


def domain_center(surface: Surface) -> tuple:
    (a1, b1), (a2, b2) = surface.domain
    return (0.5 * (a1 + b1), 0.5 * (a2 + b2))


def reference_field(frame: GeometryFrame) -> ShellPointState:
    return reference_state(frame)


__all__ = ["QuadratureSpec", "ConvergenceResult", "SyntheticField", "gauss_legendre", "surface_rule",
           "integrate_volume", "integrate_reduced", "convergence_study", "volume_density",
           "reduced_point_density", "domain_center", "reference_field"]

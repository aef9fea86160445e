"""Small fixed-size tensor algebra on 2x2 and 3x3 matrices.

Most helpers only use array methods, operators and indexing, so they accept
stacked arrays of shape (..., 3, 3) and work unchanged on numpy and jax
arrays. Functions that raise on bad input (``axl``, ``polar_decompose``) are
numpy-only.
"""

from __future__ import annotations

import numpy as np

from .errors import Degenerate, NotSkew

J2 = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
E3E3 = np.diag([0.0, 0.0, 1.0])
ID3 = np.eye(3)

POLAR_MAX_ITERS = 50


def transpose(X):
    return X.swapaxes(-1, -2)


def sym(X):
    return 0.5 * (X + X.swapaxes(-1, -2))


def skew(X):
    return 0.5 * (X - X.swapaxes(-1, -2))


def tr(X):
    return X[..., 0, 0] + X[..., 1, 1] + X[..., 2, 2]


def dev(X):
    return X - (tr(X) / 3.0)[..., None, None] * ID3


def inner(X, Y):
    """Frobenius inner product over the last two axes."""
    return (X * Y).sum(axis=(-2, -1))


def sqnorm(X):
    return inner(X, X)


def cartan_decompose(X):
    """Split X into (dev sym X, skew X, tr(X)/3 * identity)."""
    spherical = (tr(X) / 3.0)[..., None, None] * ID3
    return sym(X) - spherical, skew(X), spherical


def axl_unchecked(A):
    """Axial vector (-A23, A13, -A12) read off the lower/upper entries of a skew matrix."""
    return A[..., [2, 0, 1], [1, 2, 0]]


def axl(A, tol_rel: float = 1e-10) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    scale = max(np.linalg.norm(A), 1.0e-300)
    resid = np.linalg.norm(A + A.T)
    if resid > tol_rel * scale and resid > 0.0:
        raise NotSkew(f"symmetry residual {resid:.3e} exceeds {tol_rel:.1e}*|A|")
    return np.array([-A[1, 2], A[0, 2], -A[0, 1]])


def anti(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def flat_lift(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    out = np.zeros(M.shape[:-2] + (3, 3))
    out[..., :2, :2] = M
    return out


def outer(a, b):
    return a[..., :, None] * b[..., None, :]


def cofactor(X):
    """Cofactor matrix, valid also for singular X (Cayley-Hamilton form of the adjugate)."""
    X2 = X @ X
    c2 = 0.5 * (tr(X) ** 2 - tr(X2))
    adj = X2 - tr(X)[..., None, None] * X + c2[..., None, None] * ID3
    return adj.swapaxes(-1, -2)


def _polar_svd(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    W, s, Vt = np.linalg.svd(F)
    R = W @ Vt
    U = Vt.T @ np.diag(s) @ Vt
    return R, sym(U)


def polar_decompose(F) -> tuple[np.ndarray, np.ndarray]:
    """Return (R, U) with F = R U, R a rotation and U symmetric positive definite."""
    F = np.asarray(F, dtype=float)
    fnorm = np.linalg.norm(F)
    d = np.linalg.det(F)
    if not d > 1e-12 * fnorm**3:
        raise Degenerate(f"det F = {d:.3e} is not positive enough for a polar decomposition")
    R = F / np.linalg.norm(F, 2)
    for _ in range(POLAR_MAX_ITERS):
        R_next = 0.5 * (R + np.linalg.inv(R).T)
        step = np.linalg.norm(R_next - R)
        R = R_next
        if step < 1e-13:
            # quadratic convergence: one more sweep lands at rounding level
            R = 0.5 * (R + np.linalg.inv(R).T)
            break
    else:
        return _polar_svd(F)
    return R, sym(R.T @ F)

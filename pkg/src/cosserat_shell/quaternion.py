"""Unit quaternions (scalar first) for rotation I/O and solver unknowns.

The matrix map uses the homogeneous form R(q) = M(q)/|q|^2, so it is defined
and smooth for any non-zero q. That makes the derivative of a blended (not yet
normalized) quaternion field available in closed form.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation


def _bilinear(p, q, xp=np):
    """Symmetric bilinear form B with B(q, q) = |q|^2 R(q/|q|)."""
    pw, px, py, pz = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    r00 = pw * qw + px * qx - py * qy - pz * qz
    r11 = pw * qw - px * qx + py * qy - pz * qz
    r22 = pw * qw - px * qx - py * qy + pz * qz
    r01 = (px * qy + py * qx) - (pw * qz + pz * qw)
    r10 = (px * qy + py * qx) + (pw * qz + pz * qw)
    r02 = (px * qz + pz * qx) + (pw * qy + py * qw)
    r20 = (px * qz + pz * qx) - (pw * qy + py * qw)
    r12 = (py * qz + pz * qy) - (pw * qx + px * qw)
    r21 = (py * qz + pz * qy) + (pw * qx + px * qw)
    rows = [xp.stack([r00, r01, r02], axis=-1),
            xp.stack([r10, r11, r12], axis=-1),
            xp.stack([r20, r21, r22], axis=-1)]
    return xp.stack(rows, axis=-2)


def quat_to_mat(q, xp=np):
    n2 = (q * q).sum(axis=-1)
    return _bilinear(q, q, xp) / n2[..., None, None]


def quat_to_mat_derivative(q, dq, xp=np):
    """Directional derivative of R(q/|q|) along dq."""
    n2 = (q * q).sum(axis=-1)[..., None, None]
    R = _bilinear(q, q, xp) / n2
    dn2 = 2.0 * (q * dq).sum(axis=-1)[..., None, None]
    return (2.0 * _bilinear(q, dq, xp) - R * dn2) / n2


def mat_to_quat(R) -> np.ndarray:
    xyzw = Rotation.from_matrix(np.asarray(R)).as_quat()
    q = np.concatenate([xyzw[..., 3:], xyzw[..., :3]], axis=-1)
    # canonical hemisphere so the I/O round trip is deterministic
    return np.where(q[..., :1] < 0, -q, q)


def quat_mul(p, q) -> np.ndarray:
    pw, pv = p[..., :1], p[..., 1:]
    qw, qv = q[..., :1], q[..., 1:]
    w = pw * qw - (pv * qv).sum(axis=-1, keepdims=True)
    v = pw * qv + qw * pv + np.cross(pv, qv)
    return np.concatenate([w, v], axis=-1)


def quat_exp(w) -> np.ndarray:
    """Quaternion of exp(anti(w))."""
    w = np.asarray(w, float)
    th = np.linalg.norm(w, axis=-1, keepdims=True)
    return np.concatenate([np.cos(0.5 * th), 0.5 * np.sinc(th / (2 * np.pi)) * w], axis=-1)


def quat_log(q) -> np.ndarray:
    q = np.asarray(q, float)
    return Rotation.from_quat(np.concatenate([q[..., 1:], q[..., :1]], axis=-1)).as_rotvec()


def rotation_retraction(q, w) -> np.ndarray:
    """q composed with exp(anti(w)) (increment in the body frame), renormalized."""
    out = quat_mul(np.asarray(q, float), quat_exp(w))
    return out / np.linalg.norm(out, axis=-1, keepdims=True)

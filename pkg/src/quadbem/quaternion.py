"""Unit-quaternion helpers, scalar-first convention (w, x, y, z).

All rotations follow the passive body-to-world convention used throughout
the package: ``rotate(q_WB, v_B)`` expresses a body-frame vector in the
world frame.  Functions accept single quaternions of shape ``(4,)`` or
batches of shape ``(..., 4)``.
"""

from __future__ import annotations

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q: np.ndarray) -> np.ndarray:
    """Return q scaled to unit norm."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise ValueError("cannot normalize zero quaternion")
    return q / n


def conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Hamilton product q1 * q2."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    w1, x1, y1, z1 = (q1[..., i] for i in range(4))
    w2, x2, y2, z2 = (q2[..., i] for i in range(4))
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector(s) v by quaternion(s) q, i.e. q * v * conj(q)."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    qv = q[..., 1:]
    w = q[..., :1]
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def rotate_inverse(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate v by the inverse of unit quaternion q."""
    return rotate(conjugate(q), v)


def derivative(q: np.ndarray, omega_body: np.ndarray) -> np.ndarray:
    """Kinematic quaternion derivative q_dot = 0.5 * q * (0, omega_body)."""
    omega_body = np.asarray(omega_body, dtype=float)
    zero = np.zeros(omega_body.shape[:-1] + (1,))
    omega_quat = np.concatenate([zero, omega_body], axis=-1)
    return 0.5 * multiply(q, omega_quat)


def exp_map(rotvec: np.ndarray) -> np.ndarray:
    """Quaternion exponential of a rotation vector (angle-axis product).

    Uses the series expansion of sinc near zero so the map is smooth for
    arbitrarily small rotations.
    """
    rotvec = np.asarray(rotvec, dtype=float)
    angle = np.linalg.norm(rotvec, axis=-1, keepdims=True)
    half = 0.5 * angle
    small = angle < 1e-8
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(small, 0.5 - angle**2 / 48.0, np.sin(half) / np.where(angle == 0, 1.0, angle))
    return np.concatenate([np.cos(half), k * rotvec], axis=-1)


def log_map(q: np.ndarray) -> np.ndarray:
    """Rotation vector of a unit quaternion (inverse of :func:`exp_map`)."""
    q = np.asarray(q, dtype=float)
    w = np.clip(q[..., :1], -1.0, 1.0)
    vec = q[..., 1:]
    sin_half = np.linalg.norm(vec, axis=-1, keepdims=True)
    half = np.arctan2(sin_half, w)
    small = sin_half < 1e-9
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(small, 2.0 + 2.0 * half**2 / 3.0, 2.0 * half / np.where(sin_half == 0, 1.0, sin_half))
    return k * vec


def to_rotation_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix R with R @ v_body = rotate(q, v_body)."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def from_rotation_matrix(R: np.ndarray) -> np.ndarray:
    """Unit quaternion of a proper rotation matrix (Shepperd's method)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(R[i, i] - R[j, j] - R[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    return normalize(q)


def random_unit(rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Uniformly distributed unit quaternion(s)."""
    shape = (4,) if n is None else (n, 4)
    q = rng.standard_normal(shape)
    return normalize(q)

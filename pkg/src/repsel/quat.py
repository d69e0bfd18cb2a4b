"""Unit-quaternion helpers on plain (w, x, y, z) float64 arrays."""

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def identity() -> np.ndarray:
    return IDENTITY.copy()


def norm(q) -> float:
    return float(np.linalg.norm(q))


def normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("cannot normalize zero quaternion")
    return q / n


def conjugate(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def multiply(a, b) -> np.ndarray:
    """Hamilton product a*b (apply b first, then a)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("rotation axis must be nonzero")
    half = 0.5 * angle
    q = np.empty(4)
    q[0] = np.cos(half)
    q[1:] = (np.sin(half) / n) * axis
    return q


def to_axis_angle(q) -> tuple[np.ndarray, float]:
    """Inverse of from_axis_angle; identity maps to (+x, 0)."""
    q = np.asarray(q, dtype=float)
    if q[0] < 0:  # canonical hemisphere, angle in [0, pi]
        q = -q
    sin_half = np.linalg.norm(q[1:])
    angle = 2.0 * np.arctan2(sin_half, q[0])
    if sin_half < 1e-15:
        return np.array([1.0, 0.0, 0.0]), 0.0
    return q[1:] / sin_half, float(angle)


def rotate_vector(q, v) -> np.ndarray:
    """Rotate 3-vector v by unit quaternion q."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    # q * (0, v) * conj(q), expanded to avoid building temporaries
    w, x, y, z = q
    u = q[1:]
    uv = np.cross(u, v)
    uuv = np.cross(u, uv)
    return v + 2.0 * (w * uv + uuv)

"""Classical (Torgerson) multidimensional scaling into 3D.

Double-center the squared distance matrix, take the top three eigenpairs of
the symmetric result, clamp negative eigenvalues to zero, and fix signs so
each axis's largest-magnitude coordinate is positive. Deterministic: no
iteration, no randomness.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AsymmetricInput, NonzeroDiagonal

EIGENVALUE_FLOOR = 1e-10   # relative to the largest magnitude eigenvalue


@dataclass(frozen=True)
class Embedding3D:
    points: np.ndarray       # (R, 3), centroid at origin
    eigenvalues: np.ndarray  # top three, descending, clamped at 0
    stress: float


def _check_distance_matrix(d: np.ndarray):
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise AsymmetricInput(f"distance matrix must be square, got {d.shape}")
    if not np.allclose(d, d.T, atol=1e-12):
        raise AsymmetricInput("distance matrix is not symmetric")
    if np.any(np.abs(np.diag(d)) > 1e-12):
        raise NonzeroDiagonal("distance matrix has a nonzero diagonal")


def stress(d, points) -> float:
    """Normalized residual between input and embedded distances; 0 if exact."""
    d = np.asarray(d, dtype=float)
    points = np.asarray(points, dtype=float)
    if points.shape[0] != d.shape[0]:
        raise ValueError(
            f"{points.shape[0]} points for a {d.shape[0]}x{d.shape[1]} matrix")
    diff = points[:, None, :] - points[None, :, :]
    embedded = np.sqrt((diff ** 2).sum(axis=2))
    iu = np.triu_indices(d.shape[0], k=1)
    denom = (d[iu] ** 2).sum()
    if denom == 0.0:
        return 0.0
    return float(np.sqrt(((d[iu] - embedded[iu]) ** 2).sum() / denom))


def mds_embed(distances) -> Embedding3D:
    """Embed a distance matrix into 3D via classical MDS."""
    d = np.asarray(getattr(distances, "values", distances), dtype=float)
    _check_distance_matrix(d)
    n = d.shape[0]
    if n == 1:
        return Embedding3D(points=np.zeros((1, 3)),
                           eigenvalues=np.zeros(3), stress=0.0)

    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d ** 2) @ j
    evals, evecs = np.linalg.eigh((b + b.T) / 2.0)
    order = np.argsort(-evals, kind="stable")
    evals = evals[order[:3]]
    evecs = evecs[:, order[:3]]

    floor = EIGENVALUE_FLOOR * max(np.abs(evals).max(initial=0.0), 0.0)
    clamped = np.where(evals > floor, evals, 0.0)
    points = np.zeros((n, 3))
    points[:, :len(clamped)] = evecs * np.sqrt(clamped)

    # sign convention: largest-magnitude coordinate of each axis is positive
    for axis in range(3):
        col = points[:, axis]
        if col.any() and col[np.argmax(np.abs(col))] < 0:
            points[:, axis] = -col
    points -= points.mean(axis=0)

    return Embedding3D(points=points, eigenvalues=clamped,
                       stress=stress(d, points))

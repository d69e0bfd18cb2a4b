"""Mutual-information similarity between realizations over the VOI.

Estimator: joint histogram with equal-width bins per field, range [min, max]
over the VOI; normalized MI = 2*MI/(H_a + H_b) in [0, 1]; distances are
sqrt(1 - NMI). Pair loops go through the selected histogram kernel backend
(compiled or numpy fallback).
"""

import hashlib
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .ensemble import voi_cell_array
from .errors import CoverageMismatch, EmptyVoi
from .errors import SmallVoiWarning

DEFAULT_BINS = 32


def bin_codes(values, bins: int) -> np.ndarray:
    """Equal-width bin index per sample; a constant field maps to bin 0."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyVoi("cannot bin an empty field")
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros(values.shape, dtype=np.int64)
    codes = ((values - lo) * (bins / (hi - lo))).astype(np.int64)
    return np.minimum(codes, bins - 1)


def joint_histogram(a, b, bins: int) -> np.ndarray:
    """(bins, bins) joint count matrix of two fields over the same VOI cells."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise CoverageMismatch(
            f"fields cover {a.shape} vs {b.shape} samples")
    if a.size == 0:
        raise EmptyVoi("joint histogram over an empty VOI")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    return _kernels.joint_counts(bin_codes(a, bins), bin_codes(b, bins), bins)


class MutualInformation(NamedTuple):
    mi: float            # nats
    h_a: float
    h_b: float


def mutual_information(hist) -> MutualInformation:
    """MI and marginal entropies of a joint count matrix, in nats."""
    hist = np.asarray(hist, dtype=float)
    total = hist.sum()
    if total <= 0:
        raise EmptyVoi("histogram has no counts")
    joint = hist / total
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)

    def entropy(p):
        nz = p[p > 0.0]
        return float(-np.sum(nz * np.log(nz)))

    mask = joint > 0.0
    outer = px[:, None] * py[None, :]
    mi = float(np.sum(joint[mask] * np.log(joint[mask] / outer[mask])))
    return MutualInformation(mi=mi, h_a=entropy(px), h_b=entropy(py))


def voi_hash(cells) -> str:
    """Stable short hash of a sorted VOI cell list."""
    arr = np.asarray(sorted(int(c) for c in np.asarray(cells).reshape(-1)),
                     dtype=np.int64)
    return hashlib.sha256(arr.tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray       # (R, R) NMI, symmetric, unit diagonal
    property_name: str
    voi_hash: str
    bins: int


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray       # (R, R), symmetric, zero diagonal, in [0, 1]


def similarity_matrix(ens, prop: str, voi, bins: int = DEFAULT_BINS
                      ) -> SimilarityMatrix:
    """Pairwise NMI of one property between all realizations over the VOI."""
    cells = voi_cell_array(voi)
    if cells.size == 0:
        raise EmptyVoi("similarity requires a non-empty VOI")
    if cells.size < bins:
        warnings.warn(
            f"VOI has {cells.size} cells but {bins} bins; MI will be coarse",
            SmallVoiWarning, stacklevel=2)
    fields = ens.fields_over(prop, cells)
    codes = np.vstack([bin_codes(row, bins) for row in fields])
    nmi = _kernels.pairwise_nmi(codes, bins)
    return SimilarityMatrix(values=nmi, property_name=prop,
                            voi_hash=voi_hash(cells), bins=bins)


def to_distance(sim: SimilarityMatrix) -> DistanceMatrix:
    """d = sqrt(1 - NMI), clamped at 0; zero diagonal by construction."""
    gap = np.maximum(1.0 - sim.values, 0.0)
    d = np.sqrt(gap)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(values=d)


def write_matrix(sim: SimilarityMatrix, path):
    """Plain-text dump: one header line, then the square matrix."""
    n = sim.values.shape[0]
    lines = [f"# R={n} B={sim.bins} property={sim.property_name} "
             f"voi={sim.voi_hash}"]
    for row in sim.values:
        lines.append(" ".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

"""Pure-numpy implementations of the histogram/MI kernels."""

import numpy as np


def joint_counts(codes_a, codes_b, bins: int) -> np.ndarray:
    """(bins, bins) joint histogram of two equal-length bin-code arrays."""
    codes_a = np.asarray(codes_a, dtype=np.int64)
    codes_b = np.asarray(codes_b, dtype=np.int64)
    flat = codes_a * bins + codes_b
    counts = np.bincount(flat, minlength=bins * bins)
    return counts.reshape(bins, bins)


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def pairwise_nmi(codes, bins: int) -> np.ndarray:
    """Symmetric matrix of normalized mutual information between rows.

    ``codes`` is (R, n) of bin indices in [0, bins). Entry (a, b) is
    2*MI/(H_a + H_b) in nats, defined as 1 when both entropies vanish.
    """
    codes = np.asarray(codes, dtype=np.int64)
    n_rows, n = codes.shape
    entropies = np.empty(n_rows)
    for r in range(n_rows):
        entropies[r] = _entropy(np.bincount(codes[r], minlength=bins) / n)

    nmi = np.ones((n_rows, n_rows))
    for a in range(n_rows):
        for b in range(a + 1, n_rows):
            joint = joint_counts(codes[a], codes[b], bins) / n
            px = joint.sum(axis=1)
            py = joint.sum(axis=0)
            mask = joint > 0.0
            outer = px[:, None] * py[None, :]
            mi = float(np.sum(joint[mask] * np.log(joint[mask] / outer[mask])))
            denom = entropies[a] + entropies[b]
            value = 1.0 if denom == 0.0 else 2.0 * mi / denom
            nmi[a, b] = nmi[b, a] = value
    return nmi

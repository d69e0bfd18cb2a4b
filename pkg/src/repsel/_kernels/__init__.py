"""Histogram/MI hot kernels: compiled extension with a numpy fallback.

The pairwise mutual-information pass touches every VOI cell for every
realization pair, which dominates pipeline runtime; it is the one piece
worth compiling. Import picks the compiled extension when present unless
``REPSEL_FORCE_FALLBACK`` is set.
"""

import os

from . import _fallback


def load_backend(name: str):
    """Return the kernel module for 'compiled' or 'fallback'."""
    if name == "fallback":
        return _fallback
    if name == "compiled":
        from . import _speedups
        return _speedups
    raise ValueError(f"unknown kernel backend {name!r}")


if os.environ.get("REPSEL_FORCE_FALLBACK"):
    _impl = _fallback
    BACKEND = "fallback"
else:
    try:
        from . import _speedups as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"

joint_counts = _impl.joint_counts
pairwise_nmi = _impl.pairwise_nmi

"""Representative-model selection for reservoir ensembles.

Pipeline: corner-point grid + realization ensemble -> per-cell variance
model -> VOI-restricted mutual-information similarity -> 3D MDS embedding +
kernel k-means cluster graph -> iteratively refined representative set.
Interaction kernels (arcball, gesture state machines, cutaway lens) are
deterministic and testable on recorded event traces.
"""

__version__ = "0.1.0"

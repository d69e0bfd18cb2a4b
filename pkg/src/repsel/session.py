"""Analysis session: the load -> variance -> VOI -> cluster -> refine loop.

One mutable session owns the workflow state and enforces its order: no
clustering before a non-empty VOI, no decisions on a graph computed for an
older VOI revision. Exports are replayable: the session file pins the
manifest, VOI, clustering parameters, and the decision log; re-running them
must land on the same members.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import representative as rep
from .clustering import build_cluster_graph, graph_to_json
from .ensemble import compute_variance, load_manifest, variance_over_voi
from .errors import ReplayMismatch, StaleGraph, WorkflowOrder
from .similarity import similarity_matrix, to_distance
from .spatialquery import (SelectionVolume, VoiSelection, cells_in_volume,
                           classify_cells, toggle_cell)

SESSION_VERSION = 1


@dataclass(frozen=True)
class ClusteringParams:
    k: int
    seed: int
    bins: int = 32
    sigma: float | None = None
    property_name: str | None = None    # defaults to the first property


def _f(x) -> str:
    """Float as decimal text with full round-trip precision."""
    return repr(float(x))


class AnalysisSession:
    def __init__(self):
        self.manifest_path: str | None = None
        self.ensemble = None
        self.properties: list[str] = []
        self.variance = None
        self.voi = VoiSelection(frozenset())
        self.params: ClusteringParams | None = None
        self.graph = None
        self.graph_voi_revision: int | None = None
        self.rset: rep.RepresentativeSet | None = None
        self.revision = 0

    # --- guards -------------------------------------------------------------

    def _require_ensemble(self):
        if self.ensemble is None:
            raise WorkflowOrder("load an ensemble first")

    def _require_current_graph(self):
        if self.graph is None:
            raise WorkflowOrder("run clustering first")
        if self.graph_stale:
            raise StaleGraph(
                f"graph was computed for VOI revision "
                f"{self.graph_voi_revision}, current is {self.voi.revision}")

    @property
    def graph_stale(self) -> bool:
        return (self.graph is not None
                and self.graph_voi_revision != self.voi.revision)

    # --- workflow steps --------------------------------------------------------

    def load_ensemble(self, manifest_path):
        self.ensemble = load_manifest(manifest_path)
        self.manifest_path = str(manifest_path)
        self.properties = list(self.ensemble.property_names)
        self.variance = compute_variance(self.ensemble, self.properties)
        self.voi = VoiSelection(frozenset())
        self.params = None
        self.graph = None
        self.graph_voi_revision = None
        self.rset = None
        self.revision += 1
        return self

    def set_voi(self, cells):
        self._require_ensemble()
        self.voi = VoiSelection.from_cells(self.ensemble.grid, cells,
                                           revision=self.voi.revision + 1)
        self.revision += 1
        return self.voi

    def toggle_voi_cell(self, flat: int):
        self._require_ensemble()
        self.voi = toggle_cell(self.ensemble.grid, self.voi, flat)
        self.revision += 1
        return self.voi

    def add_voi_box(self, anchor, corner):
        self._require_ensemble()
        vol = SelectionVolume(anchor=np.asarray(anchor, dtype=float),
                              free_corner=np.asarray(corner, dtype=float))
        picked = cells_in_volume(self.ensemble.grid, vol)
        cells = set(self.voi.cells) | {int(c) for c in picked}
        self.voi = VoiSelection(cells=frozenset(cells),
                                revision=self.voi.revision + 1)
        self.revision += 1
        return self.voi

    def similarity_property(self, params: ClusteringParams | None = None
                            ) -> str:
        params = params or self.params
        if params is not None and params.property_name:
            return params.property_name
        return self.properties[0]

    def run_clustering(self, params: ClusteringParams):
        self._require_ensemble()
        if len(self.voi) == 0:
            raise WorkflowOrder("select a non-empty VOI before clustering")
        prop = self.similarity_property(params)
        sim = similarity_matrix(self.ensemble, prop, self.voi,
                                bins=params.bins)
        graph = build_cluster_graph(to_distance(sim), k=params.k,
                                    seed=params.seed, sigma=params.sigma)
        self.install_graph(params, graph, self.voi.revision)
        return self.graph

    def install_graph(self, params, graph, voi_revision):
        """Atomically publish a (possibly background-computed) graph."""
        if voi_revision != self.voi.revision:
            raise StaleGraph(
                f"graph computed for VOI revision {voi_revision}, "
                f"current is {self.voi.revision}")
        self.params = params
        self.graph = graph
        self.graph_voi_revision = voi_revision
        self.rset = rep.initial_set(graph)
        self.revision += 1

    def evaluate(self, candidate: int) -> rep.CandidateReport:
        self._require_current_graph()
        return rep.evaluate_candidate(self.rset, self.graph, self.ensemble,
                                      self.properties, self.voi, candidate)

    def decide(self, candidate: int, action: str, timestamp=None):
        self._require_current_graph()
        if action not in ("accept", "reject"):
            raise ValueError(f"action must be accept or reject, got {action!r}")
        report = self.evaluate(candidate)
        mutate = rep.accept if action == "accept" else rep.reject
        self.rset = mutate(self.rset, candidate, report, timestamp=timestamp)
        self.revision += 1
        return self.rset

    def rank_outliers(self) -> list[int]:
        self._require_current_graph()
        return rep.rank_outliers(self.graph, self.rset)

    def members_variance(self):
        """Variance over the VOI restricted to the current members."""
        self._require_current_graph()
        return variance_over_voi(self.ensemble, self.properties, self.voi,
                                 subset=self.rset.members)

    def lens_query(self, lens):
        self._require_ensemble()
        return classify_cells(self.ensemble.grid, self.voi, lens)

    # --- persistence -------------------------------------------------------------

    def export(self) -> dict:
        self._require_ensemble()
        doc = {
            "version": SESSION_VERSION,
            "manifest": self.manifest_path,
            "properties": list(self.properties),
            "voi": {"cells": [int(c) for c in sorted(self.voi.cells)],
                    "revision": self.voi.revision},
            "clustering": None,
            "decisions": [],
            "members": None,
        }
        if self.params is not None:
            doc["clustering"] = {
                "k": self.params.k,
                "seed": self.params.seed,
                "bins": self.params.bins,
                "sigma": None if self.params.sigma is None
                else _f(self.params.sigma),
                "property": self.similarity_property(),
            }
        if self.rset is not None:
            doc["members"] = [int(m) for m in self.rset.members]
            doc["decisions"] = [{
                "candidate": d.candidate,
                "action": d.action,
                "mean_abs_change": _f(d.mean_abs_change),
                "max_abs_change": _f(d.max_abs_change),
                "changed_fraction": _f(d.changed_fraction),
                "outlier_score": _f(d.outlier_score),
                "timestamp": _f(d.timestamp),
            } for d in self.rset.decisions]
        return doc

    def save(self, path):
        Path(path).write_text(json.dumps(self.export(), indent=2) + "\n")

    def graph_json(self) -> dict:
        # stale graphs stay viewable (flagged); only decisions refuse them
        if self.graph is None:
            raise WorkflowOrder("run clustering first")
        doc = graph_to_json(self.graph)
        doc["stale"] = self.graph_stale
        return doc


def replay_session(doc, base_dir=None) -> AnalysisSession:
    """Rebuild a session from its export; verifies the recorded outcome.

    Raises ReplayMismatch when the recomputed members differ from the file.
    """
    if isinstance(doc, (str, Path)):
        path = Path(doc)
        base_dir = base_dir or path.parent
        doc = json.loads(path.read_text())
    manifest = Path(doc["manifest"])
    if not manifest.is_absolute() and base_dir is not None:
        candidate = Path(base_dir) / manifest
        if candidate.exists():
            manifest = candidate
    session = AnalysisSession()
    session.load_ensemble(manifest)
    voi_cells = doc["voi"]["cells"]
    if voi_cells:
        session.set_voi(voi_cells)
    if doc.get("clustering"):
        c = doc["clustering"]
        params = ClusteringParams(
            k=int(c["k"]), seed=int(c["seed"]), bins=int(c["bins"]),
            sigma=None if c.get("sigma") is None else float(c["sigma"]),
            property_name=c.get("property"))
        session.run_clustering(params)
        for d in doc.get("decisions", []):
            session.decide(int(d["candidate"]), d["action"],
                           timestamp=float(d["timestamp"]))
        recomputed = [int(m) for m in session.rset.members]
        recorded = [int(m) for m in doc.get("members") or []]
        if recomputed != recorded:
            raise ReplayMismatch(
                f"replay produced members {recomputed}, "
                f"session file says {recorded}")
    if sorted(session.voi.cells) != sorted(int(c) for c in voi_cells):
        raise ReplayMismatch("replay produced a different VOI")
    return session

"""The representative set and its audit-logged refinement loop.

The engine never auto-accepts: evaluation is pure and produces variance-delta
evidence; accept/reject record a decision and (for accepts) extend the member
list. The decision log replays exactly: applying it to the initial set
reproduces the final set.
"""

import time
from dataclasses import dataclass, replace

from .clustering import ClusterGraph
from .ensemble import DeltaReport, variance_delta, variance_over_voi
from .errors import AlreadyMember


@dataclass(frozen=True)
class Decision:
    candidate: int
    action: str                  # "accept" | "reject"
    mean_abs_change: float
    max_abs_change: float
    changed_fraction: float
    outlier_score: float
    timestamp: float


@dataclass(frozen=True)
class CandidateReport:
    candidate: int
    delta: DeltaReport
    outlier_score: float


@dataclass(frozen=True)
class RepresentativeSet:
    members: tuple[int, ...]
    decisions: tuple[Decision, ...] = ()

    def __post_init__(self):
        if len(set(self.members)) != len(self.members):
            raise AlreadyMember(f"duplicate members in {self.members}")


def initial_set(graph: ClusterGraph) -> RepresentativeSet:
    """Cluster center nodes, ordered by cluster id."""
    return RepresentativeSet(members=tuple(int(c) for c in graph.centers))


def evaluate_candidate(rset: RepresentativeSet, graph: ClusterGraph,
                       ens, props, voi, candidate: int) -> CandidateReport:
    """Variance-delta evidence for adding one candidate; does not mutate."""
    candidate = int(candidate)
    if candidate in rset.members:
        raise AlreadyMember(f"realization {candidate} is already a member")
    before = variance_over_voi(ens, props, voi, subset=rset.members)
    after = variance_over_voi(ens, props, voi,
                              subset=(*rset.members, candidate))
    return CandidateReport(
        candidate=candidate,
        delta=variance_delta(before, after),
        outlier_score=float(graph.outlier_scores[candidate]),
    )


def _decision(report: CandidateReport, action: str, timestamp) -> Decision:
    return Decision(
        candidate=report.candidate,
        action=action,
        mean_abs_change=report.delta.mean_abs_change,
        max_abs_change=report.delta.max_abs_change,
        changed_fraction=report.delta.changed_fraction,
        outlier_score=report.outlier_score,
        timestamp=time.time() if timestamp is None else float(timestamp),
    )


def accept(rset: RepresentativeSet, candidate: int, report: CandidateReport,
           timestamp=None) -> RepresentativeSet:
    candidate = int(candidate)
    if candidate in rset.members:
        raise AlreadyMember(f"realization {candidate} is already a member")
    entry = _decision(report, "accept", timestamp)
    return RepresentativeSet(members=(*rset.members, candidate),
                             decisions=(*rset.decisions, entry))


def reject(rset: RepresentativeSet, candidate: int, report: CandidateReport,
           timestamp=None) -> RepresentativeSet:
    entry = _decision(report, "reject", timestamp)
    return replace(rset, decisions=(*rset.decisions, entry))


def rank_outliers(graph: ClusterGraph, rset: RepresentativeSet) -> list[int]:
    """Non-member nodes by outlier score descending, ties by node index."""
    members = set(rset.members)
    order = sorted((i for i in range(len(graph.outlier_scores))
                    if i not in members),
                   key=lambda i: (-graph.outlier_scores[i], i))
    return order


def replay_decisions(initial: RepresentativeSet,
                     decisions) -> RepresentativeSet:
    """Reapply an audit log to an initial set; accepts extend the members."""
    members = list(initial.members)
    for d in decisions:
        if d.action == "accept":
            if d.candidate in members:
                raise AlreadyMember(
                    f"replay: {d.candidate} accepted twice")
            members.append(d.candidate)
        elif d.action != "reject":
            raise ValueError(f"unknown decision action {d.action!r}")
    return RepresentativeSet(members=tuple(members),
                             decisions=tuple(decisions))

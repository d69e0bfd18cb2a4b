"""JSON-over-HTTP facade for one analysis session.

Mutations are serialized through a single lock; clustering runs in a
background thread and its result is swapped in atomically only if the VOI
revision is unchanged (otherwise the job is discarded as stale). Every
endpoint is a thin veneer over the session so responses match in-process
calls exactly.
"""

import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .clustering import build_cluster_graph
from .errors import RepselError, StaleGraph, WorkflowOrder
from .session import AnalysisSession, ClusteringParams, replay_session
from .similarity import similarity_matrix, to_distance
from .spatialquery import FrustumLens


class EnsembleRequest(BaseModel):
    manifest: str


class VoiRequest(BaseModel):
    op: str = "set"                      # set | toggle | add-box | clear
    cells: list[int] | None = None
    anchor: list[float] | None = None
    corner: list[float] | None = None


class ClusterRequest(BaseModel):
    k: int
    seed: int = 0
    bins: int = 32
    sigma: float | None = None
    property_name: str | None = None


class EvaluateRequest(BaseModel):
    candidate: int


class DecideRequest(BaseModel):
    candidate: int
    action: str


class LensRequest(BaseModel):
    apex: list[float]
    orientation: list[float]
    near: float
    far: float
    half_angle_h: float
    half_angle_v: float

    def to_lens(self) -> FrustumLens:
        return FrustumLens(apex=np.array(self.apex),
                           orientation=np.array(self.orientation),
                           near=self.near, far=self.far,
                           half_angle_h=self.half_angle_h,
                           half_angle_v=self.half_angle_v)


class JobState:
    def __init__(self):
        self.state = "idle"            # idle|running|done|error|discarded
        self.detail = None
        self.thread = None

    def snapshot(self):
        return {"state": self.state, "detail": self.detail}


def session_snapshot(session: AnalysisSession) -> dict:
    doc = {
        "loaded": session.ensemble is not None,
        "manifest": session.manifest_path,
        "revision": session.revision,
        "realizations": session.ensemble.count if session.ensemble else 0,
        "properties": list(session.properties),
        "voi": {"cells": [int(c) for c in sorted(session.voi.cells)],
                "revision": session.voi.revision},
        "graph_ready": session.graph is not None,
        "graph_stale": session.graph_stale,
        "members": ([int(m) for m in session.rset.members]
                    if session.rset else None),
        "decision_count": len(session.rset.decisions) if session.rset else 0,
    }
    return doc


def evaluate_response(report) -> dict:
    return {
        "candidate": report.candidate,
        "outlier_score": float(report.outlier_score),
        "mean_abs_change": float(report.delta.mean_abs_change),
        "max_abs_change": float(report.delta.max_abs_change),
        "changed_fraction": float(report.delta.changed_fraction),
        "cells": [int(c) for c in report.delta.cells],
        "delta": [float(v) for v in report.delta.delta],
    }


def variance_response(vm) -> dict:
    return {"cells": [int(c) for c in vm.cells],
            "values": [float(v) for v in vm.values],
            "realizations": [int(r) for r in vm.realizations],
            "properties": list(vm.properties)}


def grid_response(session: AnalysisSession) -> dict:
    grid = session.ensemble.grid
    corners = grid._corner_arrays()
    cells = [{
        "id": int(flat),
        "corners": [[float(x) for x in corner] for corner in corners[flat]],
    } for flat in map(int, grid.active_cells())]
    lo, hi = grid.bounds()
    return {"dims": list(grid.dims), "cells": cells,
            "bounds": {"min": [float(v) for v in lo],
                       "max": [float(v) for v in hi]}}


def create_app(manifest=None, frontend_dir=None) -> FastAPI:
    app = FastAPI(title="repsel", docs_url=None, redoc_url=None)
    session = AnalysisSession()
    lock = threading.Lock()
    job = JobState()
    app.state.session = session

    if manifest is not None:
        session.load_ensemble(manifest)

    @app.exception_handler(RepselError)
    async def domain_error(request: Request, exc: RepselError):
        status = 409 if isinstance(exc, (WorkflowOrder, StaleGraph)) else 400
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=404,
                            content={"error": "FileNotFound",
                                     "detail": str(exc)})

    @app.get("/session")
    def get_session():
        return session_snapshot(session)

    @app.post("/ensemble")
    def post_ensemble(req: EnsembleRequest):
        with lock:
            session.load_ensemble(req.manifest)
            job.state, job.detail = "idle", None
        return session_snapshot(session)

    @app.get("/grid")
    def get_grid():
        session._require_ensemble()
        return grid_response(session)

    @app.get("/variance")
    def get_variance():
        session._require_ensemble()
        return variance_response(session.variance)

    @app.get("/variance/members")
    def get_members_variance():
        return variance_response(session.members_variance())

    @app.post("/voi")
    def post_voi(req: VoiRequest):
        with lock:
            if req.op == "set":
                session.set_voi(req.cells or [])
            elif req.op == "toggle":
                if req.cells is None or len(req.cells) != 1:
                    raise ValueError("toggle expects exactly one cell")
                session.toggle_voi_cell(req.cells[0])
            elif req.op == "add-box":
                if req.anchor is None or req.corner is None:
                    raise ValueError("add-box expects anchor and corner")
                session.add_voi_box(req.anchor, req.corner)
            elif req.op == "clear":
                session.set_voi([])
            else:
                raise ValueError(f"unknown VOI op {req.op!r}")
        return session_snapshot(session)

    @app.post("/cluster")
    def post_cluster(req: ClusterRequest):
        with lock:
            session._require_ensemble()
            if len(session.voi) == 0:
                raise WorkflowOrder("select a non-empty VOI before clustering")
            if job.state == "running":
                return JSONResponse(status_code=409,
                                    content={"error": "JobRunning",
                                             "detail": "clustering already "
                                                       "in progress"})
            params = ClusteringParams(k=req.k, seed=req.seed, bins=req.bins,
                                      sigma=req.sigma,
                                      property_name=req.property_name)
            snapshot = (session.ensemble, session.voi,
                        session.similarity_property(params))
            voi_revision = session.voi.revision
            job.state, job.detail = "running", None

        def work():
            try:
                ens, voi, prop = snapshot
                sim = similarity_matrix(ens, prop, voi, bins=params.bins)
                graph = build_cluster_graph(to_distance(sim), k=params.k,
                                            seed=params.seed,
                                            sigma=params.sigma)
                with lock:
                    try:
                        session.install_graph(params, graph, voi_revision)
                        job.state = "done"
                    except StaleGraph as exc:
                        job.state, job.detail = "discarded", str(exc)
            except Exception as exc:   # surfaced through /cluster/status
                job.state, job.detail = "error", f"{type(exc).__name__}: {exc}"

        job.thread = threading.Thread(target=work, daemon=True)
        job.thread.start()
        return {"status": "started"}

    @app.get("/cluster/status")
    def cluster_status():
        return job.snapshot()

    @app.get("/graph")
    def get_graph():
        return session.graph_json()

    @app.get("/outliers")
    def get_outliers():
        return {"ranked": session.rank_outliers()}

    @app.post("/evaluate")
    def post_evaluate(req: EvaluateRequest):
        return evaluate_response(session.evaluate(req.candidate))

    @app.post("/decide")
    def post_decide(req: DecideRequest):
        with lock:
            rset = session.decide(req.candidate, req.action)
        return {"members": [int(m) for m in rset.members],
                "decision_count": len(rset.decisions)}

    @app.post("/lens/query")
    def post_lens(req: LensRequest):
        return session.lens_query(req.to_lens()).to_json()

    @app.get("/export")
    def get_export():
        return session.export()

    @app.post("/import")
    async def post_import(request: Request):
        doc = await request.json()
        with lock:
            replayed = replay_session(doc)
            # adopt the replayed state as the active session
            for attr in ("manifest_path", "ensemble", "properties",
                         "variance", "voi", "params", "graph",
                         "graph_voi_revision", "rset"):
                setattr(session, attr, getattr(replayed, attr))
            session.revision += 1
        return session_snapshot(session) | {"replayed": True}

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="ui")
    return app

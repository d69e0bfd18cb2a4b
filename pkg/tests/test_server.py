"""HTTP facade: endpoint flow, twin execution against in-process calls."""

import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from repsel.clustering import graph_to_json
from repsel.server import create_app


@pytest.fixture()
def client(small_dataset):
    app = create_app()
    with TestClient(app) as c:
        c.app_state = app.state
        yield c


def wait_for_job(client, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        state = client.get("/cluster/status").json()
        if state["state"] in ("done", "error", "discarded"):
            return state
        time.sleep(0.02)
    raise TimeoutError("cluster job did not finish")


def run_flow(client, small_dataset, k=2):
    assert client.post("/ensemble", json={
        "manifest": str(small_dataset["manifest"])}).status_code == 200
    client.post("/voi", json={"op": "set", "cells": small_dataset["voi"]})
    client.post("/cluster", json={"k": k, "seed": 0, "bins": 8})
    state = wait_for_job(client)
    assert state["state"] == "done", state
    return client


def test_session_snapshot_lifecycle(client, small_dataset):
    snap = client.get("/session").json()
    assert snap["loaded"] is False
    run_flow(client, small_dataset)
    snap = client.get("/session").json()
    assert snap["loaded"] and snap["realizations"] == 8
    assert snap["graph_ready"] and not snap["graph_stale"]
    assert len(snap["members"]) == 2


def test_cluster_requires_voi(client, small_dataset):
    client.post("/ensemble", json={"manifest": str(small_dataset["manifest"])})
    r = client.post("/cluster", json={"k": 2})
    assert r.status_code == 409
    assert r.json()["error"] == "WorkflowOrder"


def test_missing_manifest_404(client, tmp_path):
    r = client.post("/ensemble", json={"manifest": str(tmp_path / "x.json")})
    assert r.status_code == 404


def test_twin_execution_variance_graph_evaluate(client, small_dataset):
    run_flow(client, small_dataset)
    session = client.app_state.session

    via_http = client.get("/variance").json()
    assert via_http["values"] == [float(v) for v in session.variance.values]

    graph_http = client.get("/graph").json()
    direct = graph_to_json(session.graph)
    assert graph_http["nodes"] == direct["nodes"]
    assert graph_http["objective"] == direct["objective"]

    ranked = client.get("/outliers").json()["ranked"]
    assert ranked == session.rank_outliers()

    ev_http = client.post("/evaluate",
                          json={"candidate": ranked[0]}).json()
    report = session.evaluate(ranked[0])
    assert ev_http["mean_abs_change"] == report.delta.mean_abs_change
    assert ev_http["outlier_score"] == report.outlier_score
    assert ev_http["delta"] == [float(v) for v in report.delta.delta]


def test_decide_and_export_import_round_trip(client, small_dataset):
    run_flow(client, small_dataset)
    ranked = client.get("/outliers").json()["ranked"]
    r = client.post("/decide", json={"candidate": ranked[0],
                                     "action": "accept"})
    members = r.json()["members"]
    assert ranked[0] in members

    doc = client.get("/export").json()
    assert doc["members"] == members
    r = client.post("/import", json=doc)
    assert r.status_code == 200
    assert r.json()["members"] == members


def test_voi_ops(client, small_dataset):
    client.post("/ensemble", json={"manifest": str(small_dataset["manifest"])})
    r = client.post("/voi", json={"op": "set", "cells": [0, 1, 2]})
    assert r.json()["voi"]["cells"] == [0, 1, 2]
    r = client.post("/voi", json={"op": "toggle", "cells": [1]})
    assert r.json()["voi"]["cells"] == [0, 2]
    r = client.post("/voi", json={"op": "add-box",
                                  "anchor": [-1, -1, -30],
                                  "corner": [30, 30, 1]})
    assert len(r.json()["voi"]["cells"]) > 3
    r = client.post("/voi", json={"op": "clear"})
    assert r.json()["voi"]["cells"] == []


def test_stale_graph_conflict(client, small_dataset):
    run_flow(client, small_dataset)
    client.post("/voi", json={"op": "toggle", "cells": [0]})
    assert client.get("/session").json()["graph_stale"] is True
    graph = client.get("/graph").json()
    assert graph["stale"] is True and graph["nodes"]   # viewable, flagged
    r = client.post("/decide", json={"candidate": 99, "action": "accept"})
    assert r.status_code == 409
    assert r.json()["error"] == "StaleGraph"


def test_stale_job_discarded(client, small_dataset):
    client.post("/ensemble", json={"manifest": str(small_dataset["manifest"])})
    client.post("/voi", json={"op": "set", "cells": small_dataset["voi"]})
    client.post("/cluster", json={"k": 2, "seed": 0, "bins": 8})
    # mutate the VOI while (or right after) the job runs
    client.post("/voi", json={"op": "toggle", "cells": [0]})
    state = wait_for_job(client)
    assert state["state"] in ("discarded", "done")
    if state["state"] == "done":
        # job finished before the toggle; the graph must then be stale
        assert client.get("/session").json()["graph_stale"]


def test_lens_query_endpoint(client, small_dataset):
    run_flow(client, small_dataset)
    far_lens = {"apex": [500.0, 500.0, 100.0],
                "orientation": [1, 0, 0, 0], "near": 1.0, "far": 5.0,
                "half_angle_h": 0.5, "half_angle_v": 0.5}
    doc = client.post("/lens/query", json=far_lens).json()
    assert set(e["status"] for e in doc["cells"].values()) == {"retained"}

    session = client.app_state.session
    center = session.ensemble.grid.cell_centers()[0]
    voi_cell = sorted(session.voi.cells)[0]
    voi_center = session.ensemble.grid.cell_centers()[voi_cell]
    close_lens = {"apex": [float(voi_center[0]), float(voi_center[1]),
                           float(voi_center[2]) + 10.0],
                  "orientation": [1, 0, 0, 0], "near": 2.0, "far": 40.0,
                  "half_angle_h": 1.0, "half_angle_v": 1.0}
    doc = client.post("/lens/query", json=close_lens).json()
    assert doc["cells"][str(voi_cell)]["status"] == "retained"


def test_grid_endpoint(client, small_dataset):
    client.post("/ensemble", json={"manifest": str(small_dataset["manifest"])})
    doc = client.get("/grid").json()
    assert doc["dims"] == [10, 10, 2]
    assert len(doc["cells"]) == 200
    assert len(doc["cells"][0]["corners"]) == 8

"""Command-line interface end to end."""

import json

import pytest
from click.testing import CliRunner

from repsel.cli import main
from repsel.session import AnalysisSession, ClusteringParams

from conftest import asset_path


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-ds")
    runner = CliRunner()
    result = runner.invoke(main, [
        "generate", "--out", str(out), "--dims", "10x10x2",
        "--families", "2", "--per-family", "4", "--seed", "5"])
    assert result.exit_code == 0, result.output
    voi = json.loads((out / "labels.json").read_text())["channel_cells"]
    (out / "voi.json").write_text(json.dumps({"cells": voi}))
    return out


def test_generate_outputs(dataset_dir):
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    assert len(manifest["realizations"]) == 8
    assert (dataset_dir / "grid.grdecl").exists()
    labels = json.loads((dataset_dir / "labels.json").read_text())
    assert sorted(set(labels["family_labels"])) == [0, 1]


def test_generate_deterministic(dataset_dir, tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "generate", "--out", str(tmp_path / "again"), "--dims", "10x10x2",
        "--families", "2", "--per-family", "4", "--seed", "5"])
    assert result.exit_code == 0
    a = (dataset_dir / "r000_PERMX.grdecl").read_text()
    b = (tmp_path / "again" / "r000_PERMX.grdecl").read_text()
    assert a == b


def test_variance_command(dataset_dir):
    runner = CliRunner()
    result = runner.invoke(main, [
        "variance", "--manifest", str(dataset_dir / "manifest.json")])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert len(doc["cells"]) == 200
    assert all(v >= 0 for v in doc["values"])


def test_cluster_and_auto_select(dataset_dir, tmp_path):
    runner = CliRunner()
    graph_path = tmp_path / "graph.json"
    result = runner.invoke(main, [
        "cluster", "--manifest", str(dataset_dir / "manifest.json"),
        "--voi", str(dataset_dir / "voi.json"), "--k", "2", "--seed", "0",
        "--bins", "8", "--out", str(graph_path)])
    assert result.exit_code == 0, result.output
    graph = json.loads(graph_path.read_text())
    assert graph["k"] == 2 and len(graph["nodes"]) == 8

    result = runner.invoke(main, [
        "auto-select", "--manifest", str(dataset_dir / "manifest.json"),
        "--voi", str(dataset_dir / "voi.json"), "--k", "2", "--seed", "0",
        "--bins", "8"])
    assert result.exit_code == 0, result.output
    members = json.loads(result.output)["members"]
    centers = [n["id"] for n in graph["nodes"] if n["is_center"]]
    assert sorted(members) == sorted(centers)


def test_evaluate_command(dataset_dir):
    runner = CliRunner()
    result = runner.invoke(main, [
        "evaluate", "--manifest", str(dataset_dir / "manifest.json"),
        "--voi", str(dataset_dir / "voi.json"), "--k", "2", "--seed", "0",
        "--bins", "8"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["mean_abs_change"] >= 0
    assert {"candidate", "outlier_score", "max_abs_change",
            "changed_fraction"} <= set(doc)


def test_replay_matches_golden():
    runner = CliRunner()
    trace = asset_path("traces") / "rotate_quarter.trace"
    golden = (asset_path("traces") / "rotate_quarter.golden").read_text()
    result = runner.invoke(main, ["replay", str(trace),
                                  "--machine", "rotate"])
    assert result.exit_code == 0, result.output
    assert result.output == golden


def test_export_verifies_session(dataset_dir, tmp_path):
    s = AnalysisSession().load_ensemble(dataset_dir / "manifest.json")
    voi = json.loads((dataset_dir / "voi.json").read_text())["cells"]
    s.set_voi(voi)
    s.run_clustering(ClusteringParams(k=2, seed=0, bins=8))
    s.decide(s.rank_outliers()[0], "accept", timestamp=1.0)
    session_path = tmp_path / "session.json"
    s.save(session_path)

    runner = CliRunner()
    out_path = tmp_path / "session_out.json"
    result = runner.invoke(main, ["export", "--session", str(session_path),
                                  "--out", str(out_path)])
    assert result.exit_code == 0, result.output
    doc = json.loads(out_path.read_text())
    assert doc["members"] == list(s.rset.members)


def test_data_dir_env_resolution(dataset_dir, monkeypatch):
    monkeypatch.setenv("REPSEL_DATA_DIR", str(dataset_dir))
    runner = CliRunner()
    result = runner.invoke(main, ["variance", "--manifest", "manifest.json"])
    assert result.exit_code == 0, result.output
    assert len(json.loads(result.output)["cells"]) == 200

"""Batch command-line interface.

Relative data paths resolve against $REPSEL_DATA_DIR when set, else the
working directory. Every command with randomness takes --seed.
"""

import json
import os
from pathlib import Path

import click

from .clustering import build_cluster_graph, graph_to_json
from .ensemble import (ChannelFamily, SyntheticSpec, compute_variance,
                       generate_synthetic_ensemble, load_manifest,
                       variance_over_voi, write_ensemble)
from .interaction import (DEFAULT_CAROUSEL_ITEMS, GestureConfig, MACHINES,
                          format_commands, parse_trace, run_machine)
from .representative import evaluate_candidate, initial_set, rank_outliers
from .session import replay_session
from .similarity import similarity_matrix, to_distance


def data_dir() -> Path:
    return Path(os.environ.get("REPSEL_DATA_DIR", "."))


def resolve(path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else data_dir() / p


def read_voi(path) -> list[int]:
    doc = json.loads(resolve(path).read_text())
    cells = doc["cells"] if isinstance(doc, dict) else doc
    return [int(c) for c in cells]


def parse_dims(text) -> tuple[int, int, int]:
    parts = [int(v) for v in text.lower().replace("x", " ").split()]
    if len(parts) != 3:
        raise click.BadParameter(f"dims must be NIxNJxNK, got {text!r}")
    return tuple(parts)


@click.group()
def main():
    """Representative-model selection for reservoir ensembles."""


@main.command()
@click.option("--out", required=True, type=click.Path(), help="output directory")
@click.option("--dims", default="20x20x5", show_default=True)
@click.option("--families", default=3, show_default=True)
@click.option("--per-family", default=20, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--width", default=3.0, show_default=True)
@click.option("--contrast", default=2.0, show_default=True,
              help="channel contrast of the first family")
@click.option("--contrast-step", default=2.0, show_default=True,
              help="contrast increment per family")
def generate(out, dims, families, per_family, seed, width, contrast,
             contrast_step):
    """Generate a synthetic channel ensemble dataset with a manifest."""
    fams = tuple(
        ChannelFamily(orientation_deg=180.0 * f / families, width=width,
                      contrast=contrast + contrast_step * f)
        for f in range(families))
    spec = SyntheticSpec(dims=parse_dims(dims),
                         realizations_per_family=per_family,
                         seed=seed, families=fams)
    result = generate_synthetic_ensemble(spec)
    out = resolve(out)
    manifest = write_ensemble(result.ensemble, out)
    labels = {
        "family_labels": [int(x) for x in result.family_labels],
        "family_channel_cells": [[int(c) for c in cells]
                                 for cells in result.family_channel_cells],
        "channel_cells": [int(c) for c in result.channel_cells],
    }
    (out / "labels.json").write_text(json.dumps(labels) + "\n")
    click.echo(f"wrote {result.ensemble.count} realizations to {manifest}")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--props", default=None, help="comma-separated property names")
@click.option("--subset", default=None, help="comma-separated realization ids")
@click.option("--voi", "voi_path", default=None, type=click.Path(),
              help="JSON file with VOI cells; default: all active cells")
@click.option("--out", default="-", help="output JSON path or - for stdout")
def variance(manifest, props, subset, voi_path, out):
    """Compute the (combined, normalized) variance model."""
    ens = load_manifest(resolve(manifest))
    names = props.split(",") if props else ens.property_names
    rows = [int(r) for r in subset.split(",")] if subset else None
    if voi_path:
        vm = variance_over_voi(ens, names, read_voi(voi_path), subset=rows)
    else:
        vm = compute_variance(ens, names, subset=rows)
    doc = {"cells": [int(c) for c in vm.cells],
           "values": [float(v) for v in vm.values],
           "properties": list(vm.properties),
           "realizations": [int(r) for r in vm.realizations]}
    text = json.dumps(doc)
    if out == "-":
        click.echo(text)
    else:
        resolve(out).write_text(text + "\n")
        click.echo(f"wrote {resolve(out)}")


def _build_graph(manifest, voi_path, k, seed, bins, sigma, prop):
    ens = load_manifest(resolve(manifest))
    voi = read_voi(voi_path)
    prop = prop or ens.property_names[0]
    sim = similarity_matrix(ens, prop, voi, bins=bins)
    graph = build_cluster_graph(to_distance(sim), k=k, seed=seed, sigma=sigma)
    return ens, voi, graph


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--voi", "voi_path", required=True, type=click.Path())
@click.option("--k", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--bins", default=32, show_default=True)
@click.option("--sigma", default=None, type=float)
@click.option("--property", "prop", default=None)
@click.option("--out", default="-", help="graph JSON path or - for stdout")
def cluster(manifest, voi_path, k, seed, bins, sigma, prop, out):
    """Cluster realizations over the VOI and export the cluster graph."""
    _, _, graph = _build_graph(manifest, voi_path, k, seed, bins, sigma, prop)
    text = json.dumps(graph_to_json(graph))
    if out == "-":
        click.echo(text)
    else:
        resolve(out).write_text(text + "\n")
        click.echo(f"wrote {resolve(out)}")


@main.command("auto-select")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--voi", "voi_path", required=True, type=click.Path())
@click.option("--k", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--bins", default=32, show_default=True)
@click.option("--sigma", default=None, type=float)
@click.option("--property", "prop", default=None)
def auto_select(manifest, voi_path, k, seed, bins, sigma, prop):
    """Print the initial representative set (cluster centers only)."""
    _, _, graph = _build_graph(manifest, voi_path, k, seed, bins, sigma, prop)
    rset = initial_set(graph)
    click.echo(json.dumps({"members": list(rset.members)}))


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--voi", "voi_path", required=True, type=click.Path())
@click.option("--k", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--bins", default=32, show_default=True)
@click.option("--sigma", default=None, type=float)
@click.option("--property", "prop", default=None)
@click.option("--candidate", default=None, type=int,
              help="default: the top-ranked outlier")
def evaluate(manifest, voi_path, k, seed, bins, sigma, prop, candidate):
    """Evaluate adding one candidate to the initial representative set."""
    ens, voi, graph = _build_graph(manifest, voi_path, k, seed, bins, sigma,
                                   prop)
    rset = initial_set(graph)
    if candidate is None:
        ranked = rank_outliers(graph, rset)
        if not ranked:
            raise click.ClickException("no non-member candidates left")
        candidate = ranked[0]
    report = evaluate_candidate(rset, graph, ens, ens.property_names, voi,
                                candidate)
    click.echo(json.dumps({
        "candidate": report.candidate,
        "outlier_score": report.outlier_score,
        "mean_abs_change": report.delta.mean_abs_change,
        "max_abs_change": report.delta.max_abs_change,
        "changed_fraction": report.delta.changed_fraction,
    }))


@main.command()
@click.argument("trace", type=click.Path())
@click.option("--machine", required=True,
              type=click.Choice(sorted(MACHINES)))
@click.option("--center", default="0,0,0",
              help="model center for rotation, x,y,z")
@click.option("--items", default=",".join(DEFAULT_CAROUSEL_ITEMS),
              show_default=True, help="carousel items")
def replay(trace, machine, center, items):
    """Fold a recorded event trace into its gesture command sequence."""
    events = parse_trace(resolve(trace).read_text())
    commands = run_machine(
        machine, events, GestureConfig(),
        center=[float(v) for v in center.split(",")],
        items=tuple(items.split(",")))
    click.echo(format_commands(commands), nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--manifest", default=None, type=click.Path(),
              help="preload this ensemble manifest")
@click.option("--frontend", default=None, type=click.Path(),
              help="directory of built UI assets to serve at /")
def serve(host, port, manifest, frontend):
    """Run the HTTP API (and optionally the web UI)."""
    import uvicorn

    from .server import create_app
    app = create_app(manifest=resolve(manifest) if manifest else None,
                     frontend_dir=frontend)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--session", "session_path", required=True, type=click.Path())
@click.option("--out", default="-", help="output path or - for stdout")
def export(session_path, out):
    """Replay a session file and re-export its canonical form."""
    session = replay_session(resolve(session_path))
    text = json.dumps(session.export(), indent=2)
    if out == "-":
        click.echo(text)
    else:
        resolve(out).write_text(text + "\n")
        click.echo(f"verified and wrote {resolve(out)}")


if __name__ == "__main__":
    main()

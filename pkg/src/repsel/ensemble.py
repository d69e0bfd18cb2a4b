"""Realization ensembles, variance models, and a synthetic channel generator.

An ensemble shares one grid geometry and carries, per realization and per
property name, one scalar value per cell. Inactive cells are stored but
excluded from every statistic. Variance models are defined over an explicit
cell coverage (all active cells, or a VOI subset) so that deltas can insist
on matching coverage.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter

from . import grid as gridmod
from .errors import (CoverageMismatch, EmptyVoi, InvalidSpec, SubsetTooSmall,
                     UnknownProperty)

CHANGE_THRESHOLD = 1e-9


def voi_cell_array(voi) -> np.ndarray:
    """Normalize a VOI argument (VoiSelection or iterable of ids) to ids."""
    cells = getattr(voi, "cells", voi)
    arr = np.unique(np.asarray(sorted(cells) if isinstance(cells, (set, frozenset))
                               else cells, dtype=np.int64))
    return arr


@dataclass
class RealizationEnsemble:
    """Shared grid + per-realization property fields; immutable after load."""

    grid: gridmod.CornerPointGrid
    property_names: list[str]
    values: dict[str, np.ndarray]        # name -> (R, n_cells)
    ids: list[int] = field(default_factory=list)

    def __post_init__(self):
        counts = {v.shape[0] for v in self.values.values()}
        if len(counts) != 1:
            raise InvalidSpec("realization counts differ across properties")
        self.count = counts.pop()
        if self.count < 2:
            raise InvalidSpec("an ensemble needs at least two realizations")
        for name in self.property_names:
            if name not in self.values:
                raise UnknownProperty(name)
            arr = np.asarray(self.values[name], dtype=float)
            if arr.shape[1] != self.grid.n_cells:
                raise InvalidSpec(
                    f"property {name!r} does not cover every cell")
            arr.setflags(write=False)
            self.values[name] = arr
        if not self.ids:
            self.ids = list(range(self.count))

    def fields_over(self, prop: str, cells) -> np.ndarray:
        """(R, len(cells)) view of one property restricted to given cells."""
        if prop not in self.values:
            raise UnknownProperty(prop)
        return self.values[prop][:, np.asarray(cells, dtype=np.int64)]


@dataclass(frozen=True)
class VarianceModel:
    """Combined, max-normalized per-cell variance over an explicit coverage."""

    cells: np.ndarray                    # covered cell ids, ascending
    values: np.ndarray                   # same length, >= 0
    realizations: tuple[int, ...]
    properties: tuple[str, ...]

    def as_full_field(self, n_cells: int, fill=np.nan) -> np.ndarray:
        out = np.full(n_cells, fill)
        out[self.cells] = self.values
        return out


def _check_subset(ens, subset):
    if subset is None:
        subset = range(ens.count)
    subset = tuple(sorted(set(int(r) for r in subset)))
    if any(r < 0 or r >= ens.count for r in subset):
        raise IndexError(f"realization index outside 0..{ens.count - 1}")
    if len(subset) < 2:
        raise SubsetTooSmall(
            f"variance needs at least 2 realizations, got {len(subset)}")
    return subset


def _variance_over_cells(ens, props, subset, cells) -> VarianceModel:
    props = tuple(props)
    for p in props:
        if p not in ens.values:
            raise UnknownProperty(p)
    if not props:
        raise UnknownProperty("(empty property list)")
    subset = _check_subset(ens, subset)
    rows = np.asarray(subset, dtype=np.int64)
    combined = np.zeros(len(cells))
    for p in props:
        vals = ens.values[p][np.ix_(rows, cells)]
        raw = vals.var(axis=0, ddof=1)
        peak = raw.max(initial=0.0)
        combined += raw / peak if peak > 0.0 else raw
    combined /= len(props)
    return VarianceModel(cells=np.asarray(cells, dtype=np.int64),
                         values=combined, realizations=subset,
                         properties=props)


def compute_variance(ens, props, subset=None) -> VarianceModel:
    """Variance model over all active cells.

    Per property: unbiased per-cell sample variance across the subset,
    normalized by that property's maximum over the coverage; the combined
    value is the mean of the normalized per-property fields.
    """
    return _variance_over_cells(ens, props, subset, ens.grid.active_cells())


def variance_over_voi(ens, props, voi, subset=None) -> VarianceModel:
    """As compute_variance, but restricted (and normalized) over VOI cells."""
    cells = voi_cell_array(voi)
    if cells.size == 0:
        raise EmptyVoi("VOI has no cells")
    return _variance_over_cells(ens, props, subset, cells)


@dataclass(frozen=True)
class DeltaReport:
    """Per-cell signed variance change plus summary aggregates."""

    cells: np.ndarray
    delta: np.ndarray                    # after - before
    mean_abs_change: float
    max_abs_change: float
    changed_fraction: float              # |delta| > CHANGE_THRESHOLD


def variance_delta(before: VarianceModel, after: VarianceModel) -> DeltaReport:
    if not np.array_equal(before.cells, after.cells):
        raise CoverageMismatch("variance models cover different cells")
    delta = after.values - before.values
    mag = np.abs(delta)
    return DeltaReport(
        cells=before.cells,
        delta=delta,
        mean_abs_change=float(mag.mean()) if mag.size else 0.0,
        max_abs_change=float(mag.max(initial=0.0)),
        changed_fraction=float((mag > CHANGE_THRESHOLD).mean()) if mag.size
        else 0.0,
    )


# --- synthetic ensembles -------------------------------------------------------

@dataclass(frozen=True)
class ChannelFamily:
    """One scenario: a sinuous channel at a fixed orientation and contrast."""

    orientation_deg: float
    width: float
    contrast: float


@dataclass(frozen=True)
class SyntheticSpec:
    dims: tuple[int, int, int]
    realizations_per_family: int
    seed: int
    families: tuple[ChannelFamily, ...]
    property_name: str = "PERMX"
    cell_size: tuple[float, float, float] = (1.0, 1.0, 1.0)
    base_level: float = 5.0
    noise_scale: float = 0.25
    noise_window: tuple[int, int, int] = (3, 3, 1)
    sinuosity_amplitude: float = 2.0
    sinuosity_wavelength: float = 15.0

    def validate(self):
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise InvalidSpec(f"bad dims {self.dims}")
        if self.realizations_per_family < 1:
            raise InvalidSpec("need at least one realization per family")
        if not self.families:
            raise InvalidSpec("need at least one scenario family")
        if any(f.width <= 0 for f in self.families):
            raise InvalidSpec("channel width must be positive")
        if self.noise_scale < 0 or min(self.noise_window) < 1:
            raise InvalidSpec("bad noise parameters")


@dataclass
class SyntheticResult:
    ensemble: RealizationEnsemble
    family_labels: np.ndarray            # family index per realization
    family_channel_cells: list[np.ndarray]

    @property
    def channel_cells(self) -> np.ndarray:
        """Union of all families' in-channel cells (the natural VOI)."""
        return np.unique(np.concatenate(self.family_channel_cells))


def make_box_grid(dims, cell_size=(1.0, 1.0, 1.0)) -> gridmod.CornerPointGrid:
    """Regular box grid with vertical pillars, all cells active."""
    ni, nj, nk = dims
    dx, dy, dz = cell_size
    pillars = []
    depth = nk * dz
    for j in range(nj + 1):
        for i in range(ni + 1):
            pillars.append([[i * dx, j * dy, 0.0],
                            [i * dx, j * dy, -depth]])
    zcorn = np.empty(8 * ni * nj * nk)
    pos = 0
    for k in range(nk):
        for t in (0, 1):
            z = -(k + t) * dz
            zcorn[pos:pos + 4 * ni * nj] = z
            pos += 4 * ni * nj
    return gridmod.CornerPointGrid(dims, pillars, zcorn)


def _channel_mask(spec: SyntheticSpec, family_index: int,
                  centers_xy: np.ndarray) -> np.ndarray:
    fam = spec.families[family_index]
    theta = np.deg2rad(fam.orientation_deg)
    u = np.array([np.cos(theta), np.sin(theta)])
    v = np.array([-np.sin(theta), np.cos(theta)])
    origin = centers_xy.mean(axis=0)
    rel = centers_xy - origin
    s = rel @ u
    t = rel @ v
    phase = 2.0 * np.pi * family_index / max(len(spec.families), 1)
    centerline = spec.sinuosity_amplitude * np.sin(
        2.0 * np.pi * s / spec.sinuosity_wavelength + phase)
    return np.abs(t - centerline) <= fam.width / 2.0


def generate_synthetic_ensemble(spec: SyntheticSpec) -> SyntheticResult:
    """Deterministic stand-in for geostatistical simulation.

    Each realization is smoothed background noise plus its family's channel
    contrast; family labels are returned for test oracles only and are never
    fed to the analysis pipeline.
    """
    spec.validate()
    cpg = make_box_grid(spec.dims, spec.cell_size)
    centers_xy = cpg.cell_centers()[:, :2]
    ni, nj, nk = spec.dims

    masks = [_channel_mask(spec, f, centers_xy)
             for f in range(len(spec.families))]
    rng = np.random.default_rng(spec.seed)
    total = spec.realizations_per_family * len(spec.families)
    fields = np.empty((total, cpg.n_cells))
    labels = np.empty(total, dtype=np.int64)
    r = 0
    for f, fam in enumerate(spec.families):
        for _ in range(spec.realizations_per_family):
            white = rng.standard_normal((nk, nj, ni))
            smooth = uniform_filter(white, size=spec.noise_window[::-1],
                                    mode="nearest")
            values = spec.base_level + spec.noise_scale * smooth.reshape(-1)
            values[masks[f]] += fam.contrast
            fields[r] = values
            labels[r] = f
            r += 1
    ens = RealizationEnsemble(grid=cpg, property_names=[spec.property_name],
                              values={spec.property_name: fields})
    channel_cells = [np.flatnonzero(m) for m in masks]
    return SyntheticResult(ensemble=ens, family_labels=labels,
                           family_channel_cells=channel_cells)


# --- manifest IO ----------------------------------------------------------------

def load_manifest(path) -> RealizationEnsemble:
    """Load an ensemble manifest: grid file + per-realization property files."""
    path = Path(path)
    doc = json.loads(path.read_text())
    base = path.parent
    cpg = gridmod.parse_grid((base / doc["grid"]).read_text())
    props = list(doc["properties"])
    realizations = doc["realizations"]
    ids = [int(r["id"]) for r in realizations]
    values = {p: np.empty((len(realizations), cpg.n_cells)) for p in props}
    for row, real in enumerate(realizations):
        for p in props:
            fname = real["files"][p]
            parsed = gridmod.parse_property_file(
                (base / fname).read_text(), cpg.n_cells)
            if p not in parsed:
                raise UnknownProperty(
                    f"{fname} does not define property {p!r}")
            values[p][row] = parsed[p]
    return RealizationEnsemble(grid=cpg, property_names=props,
                               values=values, ids=ids)


def write_ensemble(ens: RealizationEnsemble, directory) -> Path:
    """Write grid, property files, and manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "grid.grdecl").write_text(gridmod.write_grid(ens.grid))
    realizations = []
    for r in range(ens.count):
        files = {}
        for p in ens.property_names:
            fname = f"r{r:03d}_{p}.grdecl"
            (directory / fname).write_text(
                gridmod.write_property_file(p, ens.values[p][r]))
            files[p] = fname
        realizations.append({"id": ens.ids[r], "files": files})
    manifest = {"grid": "grid.grdecl", "properties": ens.property_names,
                "realizations": realizations}
    out = directory / "manifest.json"
    out.write_text(json.dumps(manifest, indent=2))
    return out

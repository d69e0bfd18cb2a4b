"""VOI selection, frustum lens classification, exact clipping, ray picking."""

import math

import numpy as np
import pytest

from repsel import grid as g
from repsel import quat
from repsel.errors import InactiveCell, IndexOutOfRange
from repsel.spatialquery import (CLIPPED, CULLED, RETAINED, CutResult, Face,
                                 FrustumLens, SelectionVolume, VoiSelection,
                                 cells_in_volume, classify_cells, clip_cell,
                                 faces_volume, hex_faces, pick_cell,
                                 signed_distance, split_polyhedron,
                                 tet_faces, toggle_cell)

from conftest import data_path

BOX = g.parse_grid(data_path("sample_6x6x3.grdecl").read_text())
UNIT = g.parse_grid(data_path("unit_cube.grdecl").read_text())
CUBE = UNIT.cell_corners(g.CellIndex(0, 0, 0)).corners


def down_lens(apex, near, far, half=1.0):
    """Lens looking straight down (-z), identity orientation."""
    return FrustumLens(apex=np.asarray(apex, dtype=float),
                       orientation=quat.identity(), near=near, far=far,
                       half_angle_h=half, half_angle_v=half)


def random_lens(rng, center, spread):
    axis = rng.standard_normal(4)
    return FrustumLens(
        apex=center + rng.uniform(-spread, spread, size=3),
        orientation=axis / np.linalg.norm(axis),
        near=rng.uniform(1.0, 10.0),
        far=rng.uniform(20.0, 80.0),
        half_angle_h=rng.uniform(0.2, 1.0),
        half_angle_v=rng.uniform(0.2, 1.0),
    )


def frame_inside(points, lens):
    """Independent containment oracle in the lens-local frame; vectorized."""
    rel = np.atleast_2d(np.asarray(points, dtype=float)) - lens.apex
    x = rel @ lens.right
    y = rel @ lens.up
    w = rel @ lens.forward
    inside = ((w > lens.near) & (w < lens.far)
              & (np.abs(x) < w * math.tan(lens.half_angle_h))
              & (np.abs(y) < w * math.tan(lens.half_angle_v)))
    return inside if inside.size > 1 else bool(inside[0])


# --- VOI selection ------------------------------------------------------------

def test_voi_validates_cells():
    with pytest.raises(InactiveCell):
        VoiSelection.from_cells(BOX, [7])     # inactive in the sample
    with pytest.raises(IndexOutOfRange):
        VoiSelection.from_cells(BOX, [BOX.n_cells])
    voi = VoiSelection.from_cells(BOX, [0, 1, 2])
    assert len(voi) == 3 and voi.revision == 0


def test_toggle_twice_is_identity():
    voi = VoiSelection.from_cells(BOX, [0, 1])
    once = toggle_cell(BOX, voi, 3)
    twice = toggle_cell(BOX, once, 3)
    assert twice.cells == voi.cells
    assert twice.revision == voi.revision + 2
    assert toggle_cell(BOX, VoiSelection(frozenset()), 5).cells == {5}


def test_toggle_random_sequence_parity(rng):
    active = [int(c) for c in BOX.active_cells()]
    voi = VoiSelection(frozenset())
    flips = {}
    for _ in range(200):
        cell = int(rng.choice(active))
        voi = toggle_cell(BOX, voi, cell)
        flips[cell] = flips.get(cell, 0) + 1
    expected = {c for c, n in flips.items() if n % 2 == 1}
    assert voi.cells == expected
    assert voi.revision == 200


def test_toggle_rejects_inactive():
    with pytest.raises(InactiveCell):
        toggle_cell(BOX, VoiSelection(frozenset()), 7)


# --- selection volume -------------------------------------------------------------

def test_volume_covering_grid_selects_all_active():
    vol = SelectionVolume(anchor=np.array([-1.0, -1.0, -31.0]),
                          free_corner=np.array([61.0, 61.0, 1.0]))
    np.testing.assert_array_equal(cells_in_volume(BOX, vol),
                                  BOX.active_cells())


def test_zero_extent_volume_selects_nothing():
    vol = SelectionVolume(anchor=np.zeros(3), free_corner=np.zeros(3))
    assert vol.degenerate
    assert cells_in_volume(BOX, vol).size == 0


def test_cells_in_volume_matches_center_oracle(rng):
    centers = BOX.cell_centers()
    for _ in range(20):
        a = rng.uniform([-5, -5, -35], [65, 65, 5])
        b = rng.uniform([-5, -5, -35], [65, 65, 5])
        vol = SelectionVolume(anchor=a, free_corner=b)
        got = set(cells_in_volume(BOX, vol).tolist())
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        expected = {int(c) for c in range(BOX.n_cells)
                    if BOX.active[c] and np.all(centers[c] >= lo)
                    and np.all(centers[c] <= hi)}
        assert got == expected


def test_handle_points_are_box_corners():
    vol = SelectionVolume(anchor=np.array([1.0, 2.0, 3.0]),
                          free_corner=np.array([0.0, 5.0, -1.0]))
    handles = vol.handle_points()
    assert handles.shape == (8, 3)
    assert {tuple(h) for h in handles} == {
        (x, y, z) for x in (0.0, 1.0) for y in (2.0, 5.0)
        for z in (-1.0, 3.0)}


# --- signed distance ---------------------------------------------------------------

def test_axis_point_inside_positive():
    lens = down_lens([0, 0, 10], near=2.0, far=8.0)
    midpoint = np.array([0.0, 0.0, 10.0 - 5.0])
    assert signed_distance(midpoint, lens) > 0


def test_point_behind_apex_outside():
    lens = down_lens([0, 0, 10], near=2.0, far=8.0)
    assert signed_distance([0.0, 0.0, 12.0], lens) <= 0


def test_sign_agrees_with_halfspace_oracle(rng):
    for _ in range(20):
        lens = random_lens(rng, center=np.zeros(3), spread=5.0)
        pts = rng.uniform(-60, 60, size=(200, 3))
        oracle = frame_inside(pts, lens)
        for p, want in zip(pts, oracle):
            assert (signed_distance(p, lens) > 0) == want


# --- clipping ------------------------------------------------------------------------

def test_face_soup_volumes():
    assert faces_volume(hex_faces(CUBE)) == pytest.approx(1.0, abs=1e-12)
    a, b, c, d = (np.zeros(3), np.array([1.0, 0, 0]),
                  np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))
    assert faces_volume(tet_faces(a, b, c, d)) == pytest.approx(1 / 6,
                                                                abs=1e-15)


def test_split_conserves_volume_and_caps(rng):
    for _ in range(20):
        n = rng.standard_normal(3)
        n /= np.linalg.norm(n)
        offset = -float(n @ np.array([0.5, 0.5, -0.5])) \
            + rng.uniform(-0.3, 0.3)
        out_part, in_part = split_polyhedron(hex_faces(CUBE), n, offset)
        vol_out = faces_volume(out_part) if out_part else 0.0
        vol_in = faces_volume(in_part) if in_part else 0.0
        assert vol_out + vol_in == pytest.approx(1.0, abs=1e-9)
        for part, sign in ((out_part, 1.0), (in_part, -1.0)):
            for f in part or []:
                if f.kind == "cap":
                    np.testing.assert_allclose(f.cap_normal, n, atol=1e-12)
                    for v in f.vertices:
                        assert abs(float(n @ v + offset)) <= 1e-9


def test_half_cube_slice_single_cap():
    # lens pointing down; only its near plane (z = -0.5) crosses the cube
    lens = down_lens([0.5, 0.5, 1.0], near=1.5, far=10.0, half=1.0)
    result = clip_cell(CUBE, lens)
    assert result.retained_volume == pytest.approx(0.5, abs=1e-9)
    assert result.removed_volume == pytest.approx(0.5, abs=1e-9)
    caps = [f for f in result.faces if f.kind == "cap"]
    assert len(caps) == 1
    np.testing.assert_allclose(caps[0].cap_normal, [0, 0, -1], atol=1e-12)
    assert np.allclose(caps[0].vertices[:, 2], -0.5, atol=1e-12)


def test_cell_outside_lens_unchanged():
    lens = down_lens([100.0, 100.0, 50.0], near=1.0, far=2.0)
    result = clip_cell(CUBE, lens)
    assert result.removed_volume == 0.0
    assert result.retained_volume == pytest.approx(1.0, abs=1e-12)
    assert all(f.kind == "original" for f in result.faces)


def test_degenerate_cell_clips_to_nothing():
    flat_cell = CUBE.copy()
    flat_cell[4:, 2] = flat_cell[:4, 2]      # zero thickness
    lens = down_lens([0.5, 0.5, 1.0], near=0.5, far=10.0)
    result = clip_cell(flat_cell, lens)
    assert result.pieces == []
    assert result.retained_volume == 0.0 and result.removed_volume == 0.0


def test_clip_volume_conservation_and_mc(rng):
    """Random straddling cells: exact conservation + MC removed-volume check."""
    checked = 0
    for trial in range(60):
        lens = random_lens(rng, center=np.array([30.0, 30.0, -15.0]),
                           spread=30.0)
        corners = BOX._corner_arrays()
        inside8 = frame_inside(corners[:40].reshape(-1, 3),
                               lens).reshape(-1, 8)
        straddle = [i for i in range(40)
                    if 0 < inside8[i].sum() < 8]
        for flat in straddle[:2]:
            cell = corners[flat]
            result = clip_cell(cell, lens)
            cell_vol = BOX.cell_volume(BOX.cell_index(flat))
            assert (result.retained_volume + result.removed_volume
                    == pytest.approx(cell_vol, rel=1e-6))
            # rejection-sampling oracle for the removed (inside-lens) part
            lo, hi = cell.min(axis=0), cell.max(axis=0)
            pts = rng.uniform(lo, hi, size=(60_000, 3))
            in_cell = np.all((pts >= lo) & (pts <= hi), axis=1)  # box cells
            in_lens = frame_inside(pts, lens)
            frac = (in_cell & in_lens).mean()
            mc = frac * np.prod(hi - lo)
            assert result.removed_volume == pytest.approx(
                mc, abs=max(0.02 * cell_vol, 3.0 * np.sqrt(frac / 60_000)
                            * np.prod(hi - lo)))
            checked += 1
        if checked >= 12:
            break
    assert checked >= 6


def test_twisted_cell_clips_through_tetrahedra(rng):
    # non-planar faces force the six-tetrahedron path; conservation must
    # still hold exactly
    from repsel.spatialquery import _cell_is_convex
    corners = CUBE.copy()
    corners[1, 2] += 0.3
    corners[2, 2] -= 0.2
    assert not _cell_is_convex(corners)
    cell_vol = sum(g.tet_volume(corners[a], corners[b],
                                corners[c], corners[d])
                   for a, b, c, d in g.TET_SPLIT)
    for _ in range(40):
        lens = random_lens(rng, center=np.array([0.5, 0.5, -0.5]),
                           spread=2.0)
        lens = FrustumLens(apex=lens.apex, orientation=lens.orientation,
                           near=0.5, far=4.0,
                           half_angle_h=lens.half_angle_h,
                           half_angle_v=lens.half_angle_v)
        result = clip_cell(corners, lens)
        assert (result.retained_volume + result.removed_volume
                == pytest.approx(cell_vol, rel=1e-9))
        for f in result.faces:
            if f.kind == "cap":
                assert f.cap_normal is not None


# --- classification -----------------------------------------------------------------

def test_lens_missing_grid_retains_everything():
    lens = down_lens([500.0, 500.0, 100.0], near=1.0, far=5.0)
    cut = classify_cells(BOX, None, lens)
    assert set(cut.statuses.values()) == {RETAINED}
    assert len(cut.statuses) == len(BOX.active_cells())


def test_voi_cell_at_apex_retained():
    # lens sits right on top of cell 0; without VOI it would be culled
    center = BOX.cell_centers()[0]
    lens = down_lens(center + [0, 0, 20.0], near=5.0, far=40.0, half=1.2)
    cut_plain = classify_cells(BOX, None, lens)
    assert cut_plain.statuses[0] == CULLED
    cut_voi = classify_cells(BOX, VoiSelection(frozenset({0})), lens)
    assert cut_voi.statuses[0] == RETAINED


def test_classification_matches_corner_oracle(rng):
    corners = BOX._corner_arrays()
    for _ in range(25):
        lens = random_lens(rng, center=np.array([30.0, 30.0, -15.0]),
                           spread=40.0)
        voi_cells = set(int(c) for c in
                        rng.choice(BOX.active_cells(), size=10, replace=False))
        cut = classify_cells(BOX, voi_cells, lens)
        active = set(int(c) for c in BOX.active_cells())
        assert set(cut.statuses) == active           # statuses partition
        inside_all = frame_inside(corners.reshape(-1, 3),
                                  lens).reshape(-1, 8).sum(axis=1)
        for flat in active:
            inside = inside_all[flat]
            if flat in voi_cells:
                expected = RETAINED
            elif inside == 8:
                expected = CULLED
            elif inside == 0:
                expected = RETAINED
            else:
                expected = CLIPPED
            assert cut.statuses[flat] == expected, flat
        assert not any(cut.statuses[c] in (CULLED, CLIPPED)
                       for c in voi_cells)


def test_shrinking_lens_never_culls_retained(rng):
    for _ in range(10):
        lens = random_lens(rng, center=np.array([30.0, 30.0, -15.0]),
                           spread=30.0)
        smaller = FrustumLens(apex=lens.apex, orientation=lens.orientation,
                              near=lens.near, far=lens.near
                              + 0.5 * (lens.far - lens.near),
                              half_angle_h=0.6 * lens.half_angle_h,
                              half_angle_v=0.6 * lens.half_angle_v)
        big = classify_cells(BOX, None, lens)
        small = classify_cells(BOX, None, smaller)
        for flat, status in big.statuses.items():
            if status == RETAINED:
                assert small.statuses[flat] != CULLED


def test_cut_result_json_shape():
    lens = down_lens([30.0, 30.0, 20.0], near=25.0, far=60.0, half=0.6)
    cut = classify_cells(BOX, VoiSelection(frozenset({0})), lens)
    doc = cut.to_json()
    assert set(doc["cells"]) == {str(int(c)) for c in BOX.active_cells()}
    clipped = [c for c, e in doc["cells"].items() if e["status"] == CLIPPED]
    assert clipped, "expected at least one clipped cell in this setup"
    entry = doc["cells"][clipped[0]]
    assert any(f["cap"] and f["normal"] is not None for f in entry["faces"])


# --- picking ------------------------------------------------------------------------

def ray_entry_oracle(origin, direction, corners):
    """Moller-Trumbore over the cell's surface triangles + parity."""
    crossings = []
    for tri in g.HEX_TRIANGLES:
        a, b, c = corners[tri[0]], corners[tri[1]], corners[tri[2]]
        e1, e2 = b - a, c - a
        h = np.cross(direction, e2)
        det = float(e1 @ h)
        if abs(det) < 1e-14:
            continue
        s = origin - a
        u = float(s @ h) / det
        if u < 0 or u > 1:
            continue
        qv = np.cross(s, e1)
        v = float(direction @ qv) / det
        if v < 0 or u + v > 1:
            continue
        t = float(e2 @ qv) / det
        if t > 1e-12:
            crossings.append(t)
    if not crossings:
        return None
    if len(crossings) % 2 == 1:
        return 0.0                    # origin inside
    return min(crossings)


def test_ray_through_single_cell():
    got = pick_cell(UNIT, origin=[0.5, 0.5, 5.0], direction=[0, 0, -1])
    assert got == g.CellIndex(0, 0, 0)
    assert pick_cell(UNIT, [5.0, 5.0, 5.0], [0, 0, -1]) is None
    with pytest.raises(ValueError):
        pick_cell(UNIT, [0, 0, 0], [0, 0, 0])


def test_culled_cells_are_transparent():
    # two stacked cells; cull the top one via a fabricated CutResult
    origin = [5.0, 5.0, 10.0]
    direction = [0.0, 0.0, -1.0]
    hit = pick_cell(BOX, origin, direction)
    assert hit.k == 0
    top_flat = BOX.flat_index(hit)
    statuses = {int(c): RETAINED for c in BOX.active_cells()}
    statuses[top_flat] = CULLED
    cut = CutResult(statuses=statuses, clipped={}, lens=None)
    hit2 = pick_cell(BOX, origin, direction, cut)
    assert hit2.k == 1 and (hit2.i, hit2.j) == (hit.i, hit.j)


def test_empty_cut_result_equals_no_cut(rng):
    cut = CutResult(statuses={}, clipped={}, lens=None)
    for _ in range(20):
        origin = rng.uniform([-10, -10, 5], [70, 70, 20])
        target = rng.uniform([0, 0, -30], [60, 60, 0])
        direction = target - origin
        assert pick_cell(BOX, origin, direction) == \
            pick_cell(BOX, origin, direction, cut)


def test_pick_matches_ray_oracle(rng):
    corners = BOX._corner_arrays()
    for _ in range(40):
        origin = rng.uniform([-10, -10, 5], [70, 70, 25])
        target = rng.uniform([5, 5, -25], [55, 55, -5])
        direction = target - origin
        direction /= np.linalg.norm(direction)
        best = None
        for flat in map(int, BOX.active_cells()):
            t = ray_entry_oracle(origin, direction, corners[flat])
            if t is not None and (best is None or t < best[0] - 1e-12):
                best = (t, flat)
        got = pick_cell(BOX, origin, direction)
        if best is None:
            assert got is None
        else:
            assert got is not None
            assert BOX.flat_index(got) == best[1]

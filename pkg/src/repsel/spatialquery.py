"""Geometric selection and the view-anchored cutaway lens.

The lens is a frustum (apex at the viewer, four side planes plus near/far)
whose six planes carry inward-positive normals. Classification is cell-level:
VOI cells are always retained; non-VOI cells wholly inside are culled;
straddling cells are clipped exactly, keeping the material *outside* the lens
as a set of disjoint convex pieces whose new faces are tagged as caps with
the generating plane's normal. This is the CPU analog of per-fragment GPU
culling with identical visible-geometry semantics.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import quat
from .errors import InactiveCell, IndexOutOfRange
from .grid import HEX_FACES, TET_SPLIT, CornerPointGrid, tet_volume

PLANE_EPS = 1e-9
PLANARITY_EPS = 1e-9

# Outward-wound triangular faces of a positively oriented tetrahedron
# (a, b, c, d): verified by the volume identity in the test suite.
TET_FACES = ((0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3))


# --- VOI selection -------------------------------------------------------------

@dataclass(frozen=True)
class VoiSelection:
    """Set of active flat cell ids with a revision counter."""

    cells: frozenset
    revision: int = 0

    @classmethod
    def from_cells(cls, grid: CornerPointGrid, cells, revision: int = 0):
        ids = sorted(int(c) for c in cells)
        for c in ids:
            if not 0 <= c < grid.n_cells:
                raise IndexOutOfRange(f"cell {c} outside grid {grid.dims}")
            if not grid.active[c]:
                raise InactiveCell(f"cell {c} is inactive")
        return cls(cells=frozenset(ids), revision=revision)

    def cell_array(self) -> np.ndarray:
        return np.array(sorted(self.cells), dtype=np.int64)

    def __len__(self):
        return len(self.cells)


def toggle_cell(grid: CornerPointGrid, voi: VoiSelection,
                flat: int) -> VoiSelection:
    """Flip one cell's membership; bumps the revision."""
    flat = int(flat)
    if not 0 <= flat < grid.n_cells:
        raise IndexOutOfRange(f"cell {flat} outside grid {grid.dims}")
    if not grid.active[flat]:
        raise InactiveCell(f"cell {flat} is inactive")
    cells = set(voi.cells)
    if flat in cells:
        cells.remove(flat)
    else:
        cells.add(flat)
    return VoiSelection(cells=frozenset(cells), revision=voi.revision + 1)


@dataclass(frozen=True)
class SelectionVolume:
    """World-axis-aligned box spanned by an anchor and a free corner."""

    anchor: np.ndarray
    free_corner: np.ndarray

    @property
    def lo(self) -> np.ndarray:
        return np.minimum(np.asarray(self.anchor, dtype=float),
                          np.asarray(self.free_corner, dtype=float))

    @property
    def hi(self) -> np.ndarray:
        return np.maximum(np.asarray(self.anchor, dtype=float),
                          np.asarray(self.free_corner, dtype=float))

    @property
    def degenerate(self) -> bool:
        return bool(np.any(self.lo == self.hi))

    def handle_points(self) -> np.ndarray:
        """The 8 box corners (cone-handle anchor positions)."""
        lo, hi = self.lo, self.hi
        return np.array([[x, y, z] for z in (lo[2], hi[2])
                         for y in (lo[1], hi[1]) for x in (lo[0], hi[0])])

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.degenerate:
            return np.zeros(len(pts), dtype=bool)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)


def cells_in_volume(grid: CornerPointGrid, vol: SelectionVolume) -> np.ndarray:
    """Active cells whose centers fall inside the box (boundary inclusive)."""
    inside = vol.contains(grid.cell_centers())
    return np.flatnonzero(inside & grid.active)


# --- frustum lens -----------------------------------------------------------------

@dataclass(frozen=True)
class FrustumLens:
    """Head-anchored frustum; forward is the local -z axis of `orientation`."""

    apex: np.ndarray
    orientation: np.ndarray          # unit quaternion (w, x, y, z)
    near: float
    far: float
    half_angle_h: float              # radians
    half_angle_v: float

    def __post_init__(self):
        object.__setattr__(self, "apex",
                           np.asarray(self.apex, dtype=float).reshape(3))
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ValueError(f"orientation is not a unit quaternion: {q}")
        object.__setattr__(self, "orientation", q)
        if not 0.0 < self.near < self.far:
            raise ValueError(f"need 0 < near < far, got {self.near}, {self.far}")
        for angle in (self.half_angle_h, self.half_angle_v):
            if not 0.0 < angle < math.pi / 2:
                raise ValueError(f"half-angle out of (0, pi/2): {angle}")

    @property
    def forward(self) -> np.ndarray:
        return quat.rotate_vector(self.orientation, [0.0, 0.0, -1.0])

    @property
    def right(self) -> np.ndarray:
        return quat.rotate_vector(self.orientation, [1.0, 0.0, 0.0])

    @property
    def up(self) -> np.ndarray:
        return quat.rotate_vector(self.orientation, [0.0, 1.0, 0.0])

    def planes(self):
        """Six (name, unit normal, offset) with inward-positive signed
        distance n.p + offset."""
        f, r, u = self.forward, self.right, self.up
        ch, sh = math.cos(self.half_angle_h), math.sin(self.half_angle_h)
        cv, sv = math.cos(self.half_angle_v), math.sin(self.half_angle_v)
        normals = {
            "right": -r * ch + f * sh,
            "left": r * ch + f * sh,
            "top": -u * cv + f * sv,
            "bottom": u * cv + f * sv,
            "near": f,
            "far": -f,
        }
        out = []
        for name, n in normals.items():
            if name == "near":
                offset = -float(n @ self.apex) - self.near
            elif name == "far":
                offset = -float(n @ self.apex) + self.far
            else:
                offset = -float(n @ self.apex)
            out.append((name, n, offset))
        return out


def signed_distance(point, lens: FrustumLens) -> float:
    """Smallest inward plane distance: > 0 strictly inside, <= 0 outside."""
    p = np.asarray(point, dtype=float)
    return min(float(n @ p + d) for _, n, d in lens.planes())


def _corner_plane_distances(corners: np.ndarray, lens: FrustumLens):
    """(n_points, 6) inward distances for a stack of points."""
    planes = lens.planes()
    out = np.empty(corners.shape[:-1] + (len(planes),))
    for col, (_, n, d) in enumerate(planes):
        out[..., col] = corners @ n + d
    return out


# --- convex polyhedron clipping ------------------------------------------------------

@dataclass(frozen=True)
class Face:
    vertices: np.ndarray             # (m, 3) loop, outward winding
    kind: str = "original"           # "original" | "cap"
    cap_normal: np.ndarray | None = None


def faces_volume(faces) -> float:
    """Volume of a closed, outward-wound face soup."""
    total = 0.0
    for f in faces:
        v = f.vertices
        for t in range(1, len(v) - 1):
            total += np.dot(v[0], np.cross(v[t], v[t + 1]))
    return total / 6.0


def hex_faces(corners: np.ndarray) -> list[Face]:
    return [Face(vertices=np.array([corners[i] for i in loop]))
            for loop in HEX_FACES]


def tet_faces(a, b, c, d) -> list[Face]:
    v = (a, b, c, d)
    return [Face(vertices=np.array([v[i] for i in loop]))
            for loop in TET_FACES]


def _order_loop(points: list[np.ndarray], normal: np.ndarray) -> np.ndarray:
    """Deduplicate and order coplanar points CCW around `normal`."""
    unique: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > 1e-9 for q in unique):
            unique.append(p)
    if len(unique) < 3:
        return np.empty((0, 3))
    center = np.mean(unique, axis=0)
    smallest = np.argmin(np.abs(normal))
    axis = np.zeros(3)
    axis[smallest] = 1.0
    u = np.cross(normal, axis)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    angles = [math.atan2(float((p - center) @ v), float((p - center) @ u))
              for p in unique]
    order = np.argsort(angles)
    return np.array([unique[i] for i in order])


def _clip_loop(vertices: np.ndarray, dist: np.ndarray, keep_positive: bool):
    """Sutherland-Hodgman pass of one face loop against one plane side.

    Returns (kept loop or None, points lying on the plane).
    """
    sign = 1.0 if keep_positive else -1.0
    kept: list[np.ndarray] = []
    on_plane: list[np.ndarray] = []
    m = len(vertices)
    for i in range(m):
        p0, p1 = vertices[i], vertices[(i + 1) % m]
        d0, d1 = sign * dist[i], sign * dist[(i + 1) % m]
        if abs(d0) <= PLANE_EPS:
            kept.append(p0)
            on_plane.append(p0)
            continue
        if d0 > 0:
            kept.append(p0)
        crosses = (d0 > PLANE_EPS and d1 < -PLANE_EPS) or \
                  (d0 < -PLANE_EPS and d1 > PLANE_EPS)
        if crosses:
            t = d0 / (d0 - d1)
            x = p0 + t * (p1 - p0)
            kept.append(x)
            on_plane.append(x)
    # drop duplicate consecutive points
    loop: list[np.ndarray] = []
    for p in kept:
        if not loop or np.linalg.norm(p - loop[-1]) > 1e-12:
            loop.append(p)
    if len(loop) >= 3 and np.linalg.norm(loop[0] - loop[-1]) <= 1e-12:
        loop.pop()
    if len(loop) < 3:
        return None, on_plane
    return np.array(loop), on_plane


def split_polyhedron(faces, normal, offset):
    """Split convex face soup by a plane into (outside, inside) parts.

    Outside is where n.p + offset < 0. Each non-empty part is closed with a
    cap face on the plane; the outside part's cap is wound so its outward
    direction is +normal, the inside part's is -normal. Both caps carry
    cap_normal = normal (the generating plane's normal).
    """
    outside: list[Face] = []
    inside: list[Face] = []
    cut_points: list[np.ndarray] = []
    any_out = any_in = False
    for f in faces:
        dist = f.vertices @ normal + offset
        if np.all(dist >= -PLANE_EPS):
            inside.append(f)
            any_in = any_in or np.any(dist > PLANE_EPS)
            cut_points.extend(f.vertices[np.abs(dist) <= PLANE_EPS])
            continue
        if np.all(dist <= PLANE_EPS):
            outside.append(f)
            any_out = any_out or np.any(dist < -PLANE_EPS)
            cut_points.extend(f.vertices[np.abs(dist) <= PLANE_EPS])
            continue
        out_loop, on_out = _clip_loop(f.vertices, dist, keep_positive=False)
        in_loop, _ = _clip_loop(f.vertices, dist, keep_positive=True)
        if out_loop is not None:
            outside.append(replace(f, vertices=out_loop))
            any_out = True
        if in_loop is not None:
            inside.append(replace(f, vertices=in_loop))
            any_in = True
        cut_points.extend(on_out)

    if not any_out:
        return None, faces
    if not any_in:
        return faces, None

    cap_loop = _order_loop(cut_points, normal)
    if len(cap_loop) >= 3:
        outside.append(Face(vertices=cap_loop, kind="cap",
                            cap_normal=np.asarray(normal, dtype=float)))
        inside.append(Face(vertices=cap_loop[::-1], kind="cap",
                           cap_normal=np.asarray(normal, dtype=float)))
    return outside, inside


@dataclass
class ClippedCell:
    """Material kept outside the lens, as disjoint convex pieces."""

    pieces: list[list[Face]]
    retained_volume: float
    removed_volume: float

    @property
    def faces(self) -> list[Face]:
        return [f for piece in self.pieces for f in piece]


def _cell_is_convex(corners: np.ndarray) -> bool:
    """Planar faces and all corners on the inner side of each face plane."""
    scale = max(float(np.ptp(corners)), 1.0)
    tol = PLANARITY_EPS * scale
    for loop in HEX_FACES:
        pts = corners[list(loop)]
        n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
        norm = np.linalg.norm(n)
        if norm < 1e-14:
            return False
        n = n / norm
        if abs(float((pts[3] - pts[0]) @ n)) > tol:
            return False
        dist = (corners - pts[0]) @ n
        if np.any(dist > tol):     # outward normal: all corners at <= 0
            return False
    return True


def _clip_convex_solid(faces, lens: FrustumLens):
    """Retained pieces (outside the lens) + removed volume of one solid."""
    pieces = []
    removed = 0.0
    current = faces
    for _, normal, offset in lens.planes():
        out_part, in_part = split_polyhedron(current, normal, offset)
        if out_part is not None:
            vol = faces_volume(out_part)
            if vol > 1e-15:
                pieces.append(out_part)
        if in_part is None:
            current = None
            break
        current = in_part
    if current is not None:
        removed = max(faces_volume(current), 0.0)
    return pieces, removed


def clip_cell(corners, lens: FrustumLens) -> ClippedCell:
    """Clip one cell against the lens, keeping material outside of it.

    Convex planar-faced cells are clipped whole; twisted cells go through
    their six-tetrahedron decomposition so every sub-solid stays convex.
    Degenerate (zero-volume) cells yield an empty result.
    """
    corners = np.asarray(getattr(corners, "corners", corners), dtype=float)
    cell_vol = sum(tet_volume(corners[a], corners[b], corners[c], corners[d])
                   for a, b, c, d in TET_SPLIT)
    if cell_vol <= 1e-15:
        return ClippedCell(pieces=[], retained_volume=0.0, removed_volume=0.0)

    if _cell_is_convex(corners):
        solids = [hex_faces(corners)]
    else:
        solids = []
        for a, b, c, d in TET_SPLIT:
            if tet_volume(corners[a], corners[b],
                          corners[c], corners[d]) > 1e-15:
                solids.append(tet_faces(corners[a], corners[b],
                                        corners[c], corners[d]))

    pieces: list[list[Face]] = []
    removed = 0.0
    for solid in solids:
        got, gone = _clip_convex_solid(solid, lens)
        pieces.extend(got)
        removed += gone
    retained = sum(faces_volume(p) for p in pieces)
    return ClippedCell(pieces=pieces, retained_volume=retained,
                       removed_volume=removed)


# --- classification -----------------------------------------------------------------

RETAINED, CULLED, CLIPPED = "retained", "culled", "clipped"


@dataclass
class CutResult:
    """Per-active-cell lens status plus exact geometry for clipped cells."""

    statuses: dict                       # flat id -> status
    clipped: dict                        # flat id -> ClippedCell
    lens: FrustumLens

    def cells_with(self, status: str):
        return sorted(c for c, s in self.statuses.items() if s == status)

    def to_json(self) -> dict:
        cells = {}
        for flat, status in self.statuses.items():
            entry = {"status": status}
            if status == CLIPPED:
                entry["faces"] = [{
                    "vertices": [[float(x) for x in v] for v in f.vertices],
                    "cap": f.kind == "cap",
                    "normal": ([float(x) for x in f.cap_normal]
                               if f.cap_normal is not None else None),
                } for f in self.clipped[flat].faces]
            cells[str(flat)] = entry
        return {"cells": cells}


def classify_cells(grid: CornerPointGrid, voi, lens: FrustumLens) -> CutResult:
    """Status per active cell: VOI cells always retained; non-VOI cells with
    all 8 corners strictly inside are culled, straddlers are clipped."""
    if voi is None:
        voi_cells = set()
    else:
        voi_cells = set(int(c) for c in getattr(voi, "cells", voi))
    corners = grid._corner_arrays()
    dist = _corner_plane_distances(corners.reshape(-1, 3), lens)
    inside = (dist.min(axis=1) > 0.0).reshape(-1, 8)
    inside_count = inside.sum(axis=1)

    statuses = {}
    clipped = {}
    for flat in map(int, grid.active_cells()):
        if flat in voi_cells:
            statuses[flat] = RETAINED
        elif inside_count[flat] == 8:
            statuses[flat] = CULLED
        elif inside_count[flat] == 0:
            statuses[flat] = RETAINED
        else:
            statuses[flat] = CLIPPED
            clipped[flat] = clip_cell(corners[flat], lens)
    return CutResult(statuses=statuses, clipped=clipped, lens=lens)


# --- ray picking ---------------------------------------------------------------------

def _ray_tet_entry(origin, direction, verts) -> float | None:
    """Entry parameter of a ray into one tetrahedron, or None."""
    t_min, t_max = 0.0, math.inf
    for loop in TET_FACES:
        p0 = verts[loop[0]]
        n = np.cross(verts[loop[1]] - p0, verts[loop[2]] - p0)
        num = float(n @ (origin - p0))       # > 0 outside this face
        den = float(n @ direction)
        if abs(den) < 1e-15:
            if num > PLANE_EPS:
                return None
            continue
        bound = -num / den
        if den > 0:
            t_max = min(t_max, bound)
        else:
            t_min = max(t_min, bound)
        if t_min > t_max + PLANE_EPS:
            return None
    if t_max < 0.0:
        return None
    return max(t_min, 0.0)


def pick_cell(grid: CornerPointGrid, origin, direction,
              cut: CutResult | None = None):
    """Nearest active cell hit by the ray, by entry distance.

    Cells culled by the given CutResult are transparent, so interior cells
    can be picked straight through the lens opening.
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if np.linalg.norm(direction) == 0.0:
        raise ValueError("ray direction must be nonzero")
    corners = grid._corner_arrays()
    best: tuple[float, int] | None = None
    for flat in map(int, grid.active_cells()):
        if cut is not None and cut.statuses.get(flat) == CULLED:
            continue
        cell = corners[flat]
        entry = None
        for a, b, c, d in TET_SPLIT:
            verts = (cell[a], cell[b], cell[c], cell[d])
            if tet_volume(*verts) <= 1e-15:
                continue
            t = _ray_tet_entry(origin, direction, verts)
            if t is not None and (entry is None or t < entry):
                entry = t
        if entry is not None and (best is None or entry < best[0]):
            best = (entry, flat)
    return grid.cell_index(best[1]) if best else None

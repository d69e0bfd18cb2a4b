"""Corner-point reservoir grids: a strict GRDECL subset, plus cell geometry.

Supported keywords: SPECGRID, COORD, ZCORN, ACTNUM and arbitrary per-cell
property keywords; ``--`` comments, ``n*v`` run-length expansion, ``/``
terminators. Files store depths (axis pointing down); everything in memory is
z-up world coordinates with ``z = -depth``, converted once at parse time.

Cell corners are hung on the four bounding pillars at their ZCORN elevations.
Within a cell, corners are ordered (i,j)-local ``(0,0),(1,0),(0,1),(1,1)``
for the top face (k-local 0, the shallower face) then the same for the bottom
face.
"""

import io
import math
import re
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (ArityMismatch, IndexOutOfRange, InvalidGeometry,
                     MalformedNumber, MissingKeyword, NonConvexWarning)

_CORE_KEYWORDS = ("SPECGRID", "COORD", "ZCORN", "ACTNUM")

# Decomposition into six tetrahedra sharing the 0-7 diagonal; vertex order is
# chosen so each tetrahedron's signed volume is positive on an upright cell.
TET_SPLIT = ((0, 7, 3, 1), (0, 7, 2, 3), (0, 7, 6, 2),
             (0, 7, 4, 6), (0, 7, 5, 4), (0, 7, 1, 5))

# Quad faces with outward winding for the corner order documented above.
HEX_FACES = ((0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1),
             (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3))

# Surface triangles consistent with TET_SPLIT (face diagonals through 0 or 7).
HEX_TRIANGLES = ((0, 3, 1), (0, 2, 3), (4, 6, 7), (4, 7, 5),
                 (0, 4, 5), (0, 5, 1), (2, 3, 7), (2, 7, 6),
                 (0, 2, 6), (0, 6, 4), (1, 5, 7), (1, 7, 3))


class CellIndex(NamedTuple):
    i: int
    j: int
    k: int


@dataclass(frozen=True)
class HexCell:
    """Eight world-space corner points of one grid cell."""

    corners: np.ndarray  # (8, 3)


def tet_volume(a, b, c, d) -> float:
    return float(np.dot(b - a, np.cross(c - a, d - a))) / 6.0


class CornerPointGrid:
    """Immutable pillar-and-zcorn hexahedral grid with per-cell properties.

    Parameters
    ----------
    dims : (ni, nj, nk) cell counts.
    pillars : ((ni+1)*(nj+1), 2, 3) world coordinates, top point then bottom
        point per pillar, ordered j-major (i fastest).
    zcorn : (8*ni*nj*nk,) corner elevations (world z), file ordering.
    active : (ni*nj*nk,) bool, or None for all-active.
    properties : mapping name -> (ni*nj*nk,) float values; entries on
        inactive cells are stored but excluded from statistics.
    """

    def __init__(self, dims, pillars, zcorn, active=None, properties=None):
        ni, nj, nk = (int(d) for d in dims)
        if min(ni, nj, nk) < 1:
            raise InvalidGeometry(f"grid dims must be positive, got {dims}")
        self.dims = (ni, nj, nk)
        self.n_cells = ni * nj * nk

        self.pillars = np.asarray(pillars, dtype=float).reshape(-1, 2, 3)
        if self.pillars.shape[0] != (ni + 1) * (nj + 1):
            raise ArityMismatch("COORD", 6 * (ni + 1) * (nj + 1),
                                self.pillars.size)
        if np.any(np.all(self.pillars[:, 0] == self.pillars[:, 1], axis=1)):
            raise InvalidGeometry(
                "pillar top and bottom points must be distinct")

        self.zcorn = np.asarray(zcorn, dtype=float).reshape(-1)
        if self.zcorn.shape[0] != 8 * self.n_cells:
            raise ArityMismatch("ZCORN", 8 * self.n_cells, self.zcorn.shape[0])

        if active is None:
            self.active = np.ones(self.n_cells, dtype=bool)
        else:
            self.active = np.asarray(active, dtype=bool).reshape(-1)
            if self.active.shape[0] != self.n_cells:
                raise ArityMismatch("ACTNUM", self.n_cells,
                                    self.active.shape[0])

        self.properties: dict[str, np.ndarray] = {}
        for name, values in (properties or {}).items():
            values = np.asarray(values, dtype=float).reshape(-1)
            if values.shape[0] != self.n_cells:
                raise ArityMismatch(name, self.n_cells, values.shape[0])
            values.setflags(write=False)
            self.properties[name] = values

        for arr in (self.pillars, self.zcorn, self.active):
            arr.setflags(write=False)
        self._corners_cache = None

    # --- indexing ---------------------------------------------------------

    def flat_index(self, idx: CellIndex) -> int:
        ni, nj, nk = self.dims
        i, j, k = idx
        if not (0 <= i < ni and 0 <= j < nj and 0 <= k < nk):
            raise IndexOutOfRange(f"cell {tuple(idx)} outside grid {self.dims}")
        return (k * nj + j) * ni + i

    def cell_index(self, flat: int) -> CellIndex:
        ni, nj, nk = self.dims
        if not 0 <= flat < self.n_cells:
            raise IndexOutOfRange(f"flat index {flat} outside grid {self.dims}")
        k, rem = divmod(int(flat), ni * nj)
        j, i = divmod(rem, ni)
        return CellIndex(i, j, k)

    def active_cells(self) -> np.ndarray:
        """Flat ids of active cells, ascending."""
        return np.flatnonzero(self.active)

    # --- geometry -----------------------------------------------------------

    def _corner_arrays(self):
        """(n_cells, 8, 3) corner coordinates for every cell, cached."""
        if self._corners_cache is not None:
            return self._corners_cache
        ni, nj, nk = self.dims
        kk, jj, ii = np.meshgrid(np.arange(nk), np.arange(nj), np.arange(ni),
                                 indexing="ij")
        kk = kk.reshape(-1, 1)
        jj = jj.reshape(-1, 1)
        ii = ii.reshape(-1, 1)
        # local corner c = t*4 + dj*2 + di
        di = np.array([0, 1, 0, 1, 0, 1, 0, 1])
        dj = np.array([0, 0, 1, 1, 0, 0, 1, 1])
        dt = np.array([0, 0, 0, 0, 1, 1, 1, 1])
        zidx = (((kk * 2 + dt) * nj * 2) + (jj * 2 + dj)) * ni * 2 \
            + (ii * 2 + di)
        pidx = (jj + dj) * (ni + 1) + (ii + di)
        z = self.zcorn[zidx]                       # (n, 8)
        top = self.pillars[pidx, 0]                # (n, 8, 3)
        bot = self.pillars[pidx, 1]
        dz = bot[..., 2] - top[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(dz != 0.0, (z - top[..., 2]) / dz, 0.0)
        corners = top + t[..., None] * (bot - top)
        corners[..., 2] = z
        corners.setflags(write=False)
        self._corners_cache = corners
        return corners

    def cell_corners(self, idx: CellIndex) -> HexCell:
        """Corner positions of one cell, interpolated along its pillars."""
        flat = self.flat_index(CellIndex(*idx))
        return HexCell(corners=self._corner_arrays()[flat])

    def cell_center(self, idx: CellIndex) -> np.ndarray:
        return self.cell_corners(idx).corners.mean(axis=0)

    def cell_volume(self, idx: CellIndex) -> float:
        """Signed cell volume from the fixed six-tetrahedron decomposition.

        Zero-thickness cells return 0; a negative total (inverted or badly
        twisted geometry) is returned as-is with a NonConvexWarning.
        """
        c = self.cell_corners(idx).corners
        total = sum(tet_volume(c[a], c[b], c[p], c[q])
                    for a, b, p, q in TET_SPLIT)
        if total < 0.0:
            warnings.warn(
                f"cell {tuple(idx)} has negative volume {total:g}",
                NonConvexWarning, stacklevel=2)
        return total

    def cell_centers(self) -> np.ndarray:
        """(n_cells, 3) centers for all cells (mean of the 8 corners)."""
        return self._corner_arrays().mean(axis=1)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        corners = self._corner_arrays().reshape(-1, 3)
        return corners.min(axis=0), corners.max(axis=0)


# --- tokenizer ---------------------------------------------------------------

_COMMENT_RE = re.compile(r"--[^\n]*")
_RUNLENGTH_RE = re.compile(r"^(\d+)\*(.+)$")
_KEYWORD_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


def _tokenize(text: str) -> list[str]:
    return _COMMENT_RE.sub(" ", text).split()


def _parse_number(keyword: str, token: str, offset: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MalformedNumber(keyword, token, offset) from None


def _expand_values(keyword: str, tokens: list[str]) -> list[float]:
    values: list[float] = []
    for offset, tok in enumerate(tokens):
        m = _RUNLENGTH_RE.match(tok)
        if m:
            count = int(m.group(1))
            values.extend([_parse_number(keyword, m.group(2), offset)] * count)
        else:
            values.append(_parse_number(keyword, tok, offset))
    return values


def _read_keyword_blocks(tokens: list[str]) -> dict[str, list[str]]:
    """Split the token stream into keyword -> raw data tokens."""
    blocks: dict[str, list[str]] = {}
    pos = 0
    while pos < len(tokens):
        keyword = tokens[pos]
        if not _KEYWORD_RE.match(keyword):
            raise MalformedNumber("<file>", keyword, pos)
        pos += 1
        data: list[str] = []
        while pos < len(tokens) and tokens[pos] != "/":
            data.append(tokens[pos])
            pos += 1
        if pos >= len(tokens):
            raise MissingKeyword(
                "/", f"keyword {keyword!r} is not terminated by '/'")
        pos += 1  # consume the slash
        blocks[keyword.upper()] = data
    return blocks


def parse_grid(source) -> CornerPointGrid:
    """Parse a GRDECL-subset grid from a string or text stream."""
    text = source.read() if hasattr(source, "read") else source
    blocks = _read_keyword_blocks(_tokenize(text))

    for kw in ("SPECGRID", "COORD", "ZCORN"):
        if kw not in blocks:
            raise MissingKeyword(kw)

    spec = blocks.pop("SPECGRID")
    if len(spec) < 3:
        raise ArityMismatch("SPECGRID", 3, len(spec))
    dims = []
    for off, tok in enumerate(spec[:3]):
        value = _parse_number("SPECGRID", tok, off)
        if not math.isfinite(value) or value != int(value):
            raise MalformedNumber("SPECGRID", tok, off)
        if value < 1:
            raise InvalidGeometry(f"SPECGRID dims must be positive, got {tok}")
        dims.append(int(value))
    ni, nj, nk = dims
    n = ni * nj * nk

    coord = _expand_values("COORD", blocks.pop("COORD"))
    if len(coord) != 6 * (ni + 1) * (nj + 1):
        raise ArityMismatch("COORD", 6 * (ni + 1) * (nj + 1), len(coord))
    pillars = np.array(coord, dtype=float).reshape(-1, 2, 3)
    pillars[:, :, 2] *= -1.0  # depth down -> world z up

    zcorn = _expand_values("ZCORN", blocks.pop("ZCORN"))
    if len(zcorn) != 8 * n:
        raise ArityMismatch("ZCORN", 8 * n, len(zcorn))
    zcorn = -np.array(zcorn, dtype=float)

    active = None
    if "ACTNUM" in blocks:
        actnum = _expand_values("ACTNUM", blocks.pop("ACTNUM"))
        if len(actnum) != n:
            raise ArityMismatch("ACTNUM", n, len(actnum))
        active = np.array(actnum) != 0.0

    properties = {}
    for keyword, data in blocks.items():
        values = _expand_values(keyword, data)
        if len(values) != n:
            raise ArityMismatch(keyword, n, len(values))
        properties[keyword] = np.array(values, dtype=float)

    return CornerPointGrid(dims, pillars, zcorn, active, properties)


def parse_property_file(source, n_cells: int) -> dict[str, np.ndarray]:
    """Parse a file holding only property keywords (one array per keyword)."""
    text = source.read() if hasattr(source, "read") else source
    blocks = _read_keyword_blocks(_tokenize(text))
    out = {}
    for keyword, data in blocks.items():
        values = _expand_values(keyword, data)
        if len(values) != n_cells:
            raise ArityMismatch(keyword, n_cells, len(values))
        out[keyword] = np.array(values, dtype=float)
    return out


# --- writer -------------------------------------------------------------------

def _format_values(values, per_line=6, as_int=False) -> str:
    if as_int:
        toks = [str(int(v)) for v in values]
    else:
        toks = [repr(float(v)) for v in values]
    lines = [" " + " ".join(toks[i:i + per_line])
             for i in range(0, len(toks), per_line)]
    return "\n".join(lines)


def write_grid(grid: CornerPointGrid) -> str:
    """Serialize a grid; parse(write(g)) reproduces every numeric array."""
    ni, nj, nk = grid.dims
    out = io.StringIO()
    out.write(f"-- corner-point grid {ni} x {nj} x {nk}\n")
    out.write(f"SPECGRID\n {ni} {nj} {nk} 1 F\n/\n")

    coord = grid.pillars.copy()
    coord[:, :, 2] *= -1.0  # world z up -> file depth down
    out.write("COORD\n")
    out.write(_format_values(coord.reshape(-1)))
    out.write("\n/\n")

    out.write("ZCORN\n")
    out.write(_format_values(-grid.zcorn))
    out.write("\n/\n")

    if not grid.active.all():
        out.write("ACTNUM\n")
        out.write(_format_values(grid.active, per_line=20, as_int=True))
        out.write("\n/\n")

    for name, values in grid.properties.items():
        out.write(f"{name}\n")
        out.write(_format_values(values))
        out.write("\n/\n")
    return out.getvalue()


def write_property_file(name: str, values) -> str:
    return f"{name}\n" + _format_values(values) + "\n/\n"

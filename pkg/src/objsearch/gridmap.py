"""2D occupancy maps: parsing, wall distances, visibility, grid shortest paths.

Cells are (row, col) tuples. Straight grid steps cost one cell size, diagonal
steps sqrt(2) times that, so path lengths never undercut the Euclidean
distance between cell centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._kernels import astar_point, dijkstra_field

Cell = tuple[int, int]

DEFAULT_CELL_SIZE = 0.1


class MapError(ValueError):
    """Raised for malformed map text or infeasible query cells."""


@dataclass(frozen=True)
class FurnitureRegion:
    """A named obstacle region; objects may rest on its surface cells."""

    id: str
    cells: frozenset
    surface_cells: frozenset

    def __post_init__(self):
        if not self.cells:
            raise MapError(f"furniture {self.id!r} has no cells")
        if not self.surface_cells or not self.surface_cells <= self.cells:
            raise MapError(f"furniture {self.id!r} surface must be a nonempty subset")


class OccupancyMap:
    """Immutable feasible/obstacle partition of a rectangular grid."""

    def __init__(self, feasible, cell_size=DEFAULT_CELL_SIZE, furniture=()):
        feasible = np.asarray(feasible, dtype=bool)
        if feasible.ndim != 2 or feasible.size == 0:
            raise MapError("feasible grid must be a nonempty 2D array")
        if cell_size <= 0:
            raise MapError("cell_size must be positive")
        self.grid = feasible
        self.grid.setflags(write=False)
        self.cell_size = float(cell_size)
        self.furniture = {f.id: f for f in furniture}
        for f in self.furniture.values():
            for c in f.cells:
                if self.grid[c]:
                    raise MapError(f"furniture {f.id!r} cell {c} is not an obstacle")
        self._wall = None

    @property
    def height(self):
        return self.grid.shape[0]

    @property
    def width(self):
        return self.grid.shape[1]

    def in_bounds(self, cell):
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    def is_feasible(self, cell):
        return self.in_bounds(cell) and bool(self.grid[cell])

    def feasible_cells(self):
        """All feasible cells in (row, col) lexicographic order."""
        rows, cols = np.nonzero(self.grid)
        return list(zip(rows.tolist(), cols.tolist()))

    def component(self, start):
        """Feasible cells 8-connected to ``start``, lexicographically sorted."""
        if not self.is_feasible(start):
            raise MapError(f"start cell {start} is not feasible")
        labels, _ = ndimage.label(self.grid, structure=np.ones((3, 3), dtype=int))
        rows, cols = np.nonzero(labels == labels[start])
        return list(zip(rows.tolist(), cols.tolist()))

    def passable_u8(self):
        return np.ascontiguousarray(self.grid, dtype=np.uint8)


def parse_map(text, cell_size=DEFAULT_CELL_SIZE):
    """Parse ASCII map text: '.' feasible, '#' obstacle, 'A'-'Z' furniture.

    All cells sharing a letter form one furniture region whose surface is the
    whole region.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise MapError("empty map")
    width = len(lines[0])
    furniture_cells = {}
    feasible = np.zeros((len(lines), width), dtype=bool)
    for r, line in enumerate(lines):
        if len(line) != width:
            raise MapError(f"ragged row {r}: length {len(line)} != {width}")
        for c, ch in enumerate(line):
            if ch == ".":
                feasible[r, c] = True
            elif ch == "#":
                pass
            elif "A" <= ch <= "Z":
                furniture_cells.setdefault(ch, set()).add((r, c))
            else:
                raise MapError(f"unknown character {ch!r} at row {r}, col {c}")
    furniture = [
        FurnitureRegion(name, frozenset(cells), frozenset(cells))
        for name, cells in sorted(furniture_cells.items())
    ]
    return OccupancyMap(feasible, cell_size=cell_size, furniture=furniture)


def load_map(path, cell_size=DEFAULT_CELL_SIZE):
    with open(path, encoding="utf-8") as fh:
        return parse_map(fh.read(), cell_size=cell_size)


def wall_distance(occ_map):
    """Per-cell Euclidean distance (meters) to the nearest obstacle-or-boundary
    cell center. Obstacle cells hold 0. Cached on the map."""
    if occ_map._wall is None:
        target = ~occ_map.grid  # obstacles plus the outermost rows/cols
        target = target.copy()
        target[0, :] = target[-1, :] = True
        target[:, 0] = target[:, -1] = True
        wall = ndimage.distance_transform_edt(~target, sampling=occ_map.cell_size)
        wall.setflags(write=False)
        occ_map._wall = wall
    return occ_map._wall


def astar_distance(occ_map, a, b):
    """Shortest 8-connected collision-free path length (meters) from a to b.

    Returns math.inf when the cells are disconnected.
    """
    for cell in (a, b):
        if not occ_map.is_feasible(cell):
            raise MapError(f"cell {cell} is not feasible")
    if a == b:
        return 0.0
    d = astar_point(occ_map.passable_u8(), a[0], a[1], b[0], b[1])
    return float(d) * occ_map.cell_size if math.isfinite(d) else math.inf


def _bresenham(a, b):
    """Cells on the discrete segment from a to b, endpoints included."""
    r0, c0 = a
    r1, c1 = b
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dc - dr
    cells = []
    r, c = r0, c0
    while True:
        cells.append((r, c))
        if (r, c) == (r1, c1):
            break
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr
    return cells


def visibility_set(occ_map, x, r_vis, occlusion=False):
    """Cells inspectable from ``x``: the Euclidean ball of radius r_vis meters,
    optionally filtered by a Bresenham line-of-sight test against obstacles."""
    if not occ_map.is_feasible(x):
        raise MapError(f"cell {x} is not feasible")
    if r_vis <= 0:
        raise MapError("r_vis must be positive")
    radius_cells = r_vis / occ_map.cell_size
    r0 = max(0, int(math.ceil(x[0] - radius_cells)))
    r1 = min(occ_map.height - 1, int(math.floor(x[0] + radius_cells)))
    c0 = max(0, int(math.ceil(x[1] - radius_cells)))
    c1 = min(occ_map.width - 1, int(math.floor(x[1] + radius_cells)))
    out = set()
    for r in range(r0, r1 + 1):
        for c in range(c0, c1 + 1):
            if (r - x[0]) ** 2 + (c - x[1]) ** 2 > radius_cells**2 + 1e-9:
                continue
            if occlusion and not _line_of_sight(occ_map, x, (r, c)):
                continue
            out.add((r, c))
    return out


def _line_of_sight(occ_map, a, b):
    # endpoints are exempt: the target may itself be an obstacle (furniture)
    for cell in _bresenham(a, b)[1:-1]:
        if not occ_map.grid[cell]:
            return False
    return True


def euclidean(a, b, cell_size=1.0):
    return math.hypot(a[0] - b[0], a[1] - b[1]) * cell_size


class DistanceOracle:
    """Cached collision-free grid distances between cells (meters).

    A full single-source distance field is computed lazily per queried source
    and reused, so batches of queries from the same cell are cheap.
    """

    def __init__(self, occ_map, max_fields=256):
        self.map = occ_map
        self._fields = {}
        self._max_fields = max_fields

    def field(self, source):
        """Distance field (meters) from ``source`` to every cell; inf where
        unreachable."""
        if not self.map.is_feasible(source):
            raise MapError(f"cell {source} is not feasible")
        f = self._fields.get(source)
        if f is None:
            if len(self._fields) >= self._max_fields:
                self._fields.pop(next(iter(self._fields)))
            f = dijkstra_field(self.map.passable_u8(), source[0], source[1])
            f = f * self.map.cell_size
            f.setflags(write=False)
            self._fields[source] = f
        return f

    def distance(self, a, b):
        if a in self._fields:
            return float(self._fields[a][b])
        return float(self.field(b)[a])

    def matrix(self, points):
        """Pairwise distance matrix over ``points`` (meters)."""
        n = len(points)
        out = np.zeros((n, n))
        for i, p in enumerate(points):
            f = self.field(p)
            for j, q in enumerate(points):
                out[i, j] = f[q]
        return out

    def diameter(self, points):
        """Max pairwise distance among ``points`` (the scene diameter proxy)."""
        m = self.matrix(points)
        return float(np.max(m))

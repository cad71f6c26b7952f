"""Vantage point selection by farthest point sampling over the feasible set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridmap import MapError


@dataclass(frozen=True)
class VantageSet:
    """Ordered vantage cells plus the radius for which they cover the scene."""

    points: tuple
    coverage_radius: float

    @property
    def k(self):
        return len(self.points)


def farthest_point_sample(occ_map, start, k, metric="euclidean"):
    """Greedy farthest point sampling of ``k`` cells from the start's
    connected component. The first point is ``start``; each later point
    maximizes the Euclidean min-distance (meters) to those already chosen,
    ties broken by lowest (row, col).
    """
    if metric != "euclidean":
        raise ValueError(f"unsupported metric {metric!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    candidates = occ_map.component(start)  # lexicographically sorted
    if k > len(candidates):
        raise MapError(f"k={k} exceeds the {len(candidates)} reachable cells")
    coords = np.asarray(candidates, dtype=float)
    selected = [start]
    mind = np.linalg.norm(coords - np.asarray(start, dtype=float), axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(mind))  # argmax returns the first (lowest) index
        cell = candidates[nxt]
        selected.append(cell)
        d = np.linalg.norm(coords - np.asarray(cell, dtype=float), axis=1)
        np.minimum(mind, d, out=mind)
    radius = float(np.max(mind)) * occ_map.cell_size
    return VantageSet(points=tuple(selected), coverage_radius=radius)


def coverage_radius(occ_map, vantage):
    """Max over reachable feasible cells of the Euclidean distance (meters) to
    the nearest vantage point: the epsilon for which the set is a cover."""
    points = vantage.points if isinstance(vantage, VantageSet) else tuple(vantage)
    if not points:
        raise ValueError("vantage set is empty")
    cells = np.asarray(occ_map.component(points[0]), dtype=float)
    pts = np.asarray(points, dtype=float)
    d = np.linalg.norm(cells[:, None, :] - pts[None, :, :], axis=2)
    return float(np.max(np.min(d, axis=1))) * occ_map.cell_size

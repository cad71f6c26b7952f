import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sp_dijkstra

from objsearch.gridmap import (
    DistanceOracle,
    MapError,
    OccupancyMap,
    astar_distance,
    euclidean,
    parse_map,
    visibility_set,
    wall_distance,
)

from conftest import random_map


def grid_graph_distance(occ_map, a, b):
    """Independent oracle: Dijkstra via scipy.sparse.csgraph on the full
    8-connected grid graph."""
    h, w = occ_map.height, occ_map.width
    rows, cols, data = [], [], []
    for r in range(h):
        for c in range(w):
            if not occ_map.grid[r, c]:
                continue
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == dc == 0:
                        continue
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < h and 0 <= nc < w and occ_map.grid[nr, nc]:
                        rows.append(r * w + c)
                        cols.append(nr * w + nc)
                        data.append(math.sqrt(2) if dr and dc else 1.0)
    graph = csr_matrix((data, (rows, cols)), shape=(h * w, h * w))
    dist = sp_dijkstra(graph, indices=a[0] * w + a[1])
    return dist[b[0] * w + b[1]] * occ_map.cell_size


def brute_wall_distance(occ_map):
    targets = []
    h, w = occ_map.height, occ_map.width
    for r in range(h):
        for c in range(w):
            if not occ_map.grid[r, c] or r in (0, h - 1) or c in (0, w - 1):
                targets.append((r, c))
    out = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            if not occ_map.grid[r, c]:
                continue
            out[r, c] = min(euclidean((r, c), t) for t in targets)
    return out * occ_map.cell_size


class TestParseMap:
    def test_all_free(self):
        m = parse_map("..\n..")
        assert len(m.feasible_cells()) == 4
        assert not m.furniture

    def test_obstacle(self):
        m = parse_map(".#\n..")
        assert len(m.feasible_cells()) == 3
        assert not m.is_feasible((0, 1))

    def test_furniture_grouping(self):
        m = parse_map(".A\n.A")
        assert set(m.furniture) == {"A"}
        assert m.furniture["A"].cells == {(0, 1), (1, 1)}
        assert m.furniture["A"].surface_cells == {(0, 1), (1, 1)}

    def test_ragged_rows_rejected(self):
        with pytest.raises(MapError, match="ragged"):
            parse_map("..\n...")

    def test_unknown_character_rejected(self):
        with pytest.raises(MapError, match="unknown"):
            parse_map(".?\n..")

    def test_empty_rejected(self):
        with pytest.raises(MapError):
            parse_map("   \n ")

    def test_partition_is_exact(self):
        m = parse_map(".#A\n...")
        obstacle = {(0, 1), (0, 2)}
        feasible = set(m.feasible_cells())
        assert feasible | obstacle == {(r, c) for r in range(2) for c in range(3)}
        assert feasible & obstacle == set()


class TestWallDistance:
    def test_adjacent_to_obstacle(self):
        m = parse_map("\n".join(["....."] * 2 + ["..#.."] + ["....."] * 2))
        assert wall_distance(m)[2, 3] == pytest.approx(0.1)

    def test_obstacle_cell_zero(self):
        m = parse_map(".#\n..")
        assert wall_distance(m)[0, 1] == 0.0

    def test_center_of_empty_map(self):
        m = OccupancyMap(np.ones((21, 21), dtype=bool))
        assert wall_distance(m)[10, 10] == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        m = random_map(rng, 12, 15)
        assert np.allclose(wall_distance(m), brute_wall_distance(m))


class TestAstarDistance:
    def test_same_cell(self, empty10):
        assert astar_distance(empty10, (3, 3), (3, 3)) == 0.0

    def test_octile_on_empty(self, empty10):
        d = astar_distance(empty10, (0, 0), (3, 4))
        assert d == pytest.approx((3 * math.sqrt(2) + 1) * 0.1)

    def test_octile_everywhere_on_empty(self, empty10):
        for (a, b) in [((0, 0), (9, 9)), ((2, 7), (8, 1)), ((5, 5), (0, 9))]:
            dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
            octile = (max(dr, dc) - min(dr, dc) + math.sqrt(2) * min(dr, dc)) * 0.1
            assert astar_distance(empty10, a, b) == pytest.approx(octile)

    def test_detour_matches_dijkstra_oracle(self, walled_map):
        a, b = (0, 0), (0, 9)
        assert astar_distance(walled_map, a, b) == pytest.approx(
            grid_graph_distance(walled_map, a, b)
        )

    @pytest.mark.parametrize("seed", [3, 4])
    def test_random_maps_match_oracle(self, seed):
        rng = np.random.default_rng(seed)
        m = random_map(rng, 10, 10)
        cells = m.feasible_cells()
        for _ in range(20):
            a = cells[rng.integers(len(cells))]
            b = cells[rng.integers(len(cells))]
            got = astar_distance(m, a, b)
            want = grid_graph_distance(m, a, b)
            if math.isinf(want):
                assert math.isinf(got)
            else:
                assert got == pytest.approx(want)

    def test_disconnected_returns_inf(self):
        m = parse_map(".#.\n.#.\n.#.")
        assert math.isinf(astar_distance(m, (0, 0), (0, 2)))

    def test_infeasible_endpoint_rejected(self):
        m = parse_map(".#\n..")
        with pytest.raises(MapError):
            astar_distance(m, (0, 0), (0, 1))

    def test_at_least_euclidean(self, walled_map):
        cells = walled_map.feasible_cells()
        rng = np.random.default_rng(7)
        for _ in range(30):
            a = cells[rng.integers(len(cells))]
            b = cells[rng.integers(len(cells))]
            assert astar_distance(walled_map, a, b) >= euclidean(a, b, 0.1) - 1e-9


class TestVisibilitySet:
    def test_tiny_radius(self, empty10):
        vis = visibility_set(empty10, (5, 5), 0.1)
        assert vis == {(5, 5), (4, 5), (6, 5), (5, 4), (5, 6)}

    def test_contains_cell_within_range(self, empty10):
        assert (5, 9) not in visibility_set(empty10, (5, 5), 0.3)
        vis = visibility_set(empty10, (5, 5), 0.4)
        assert (5, 9) in vis  # 0.4 m away

    def test_includes_obstacle_cells(self):
        m = parse_map(".A\n.A")
        assert (0, 1) in visibility_set(m, (0, 0), 0.5)

    def test_occlusion_blocks_behind_wall(self, walled_map):
        # (1, 4) is a wall cell; (1, 6) is behind it as seen from (1, 2)
        vis_free = visibility_set(walled_map, (1, 2), 0.5, occlusion=False)
        vis_occ = visibility_set(walled_map, (1, 2), 0.5, occlusion=True)
        assert (1, 6) in vis_free
        assert (1, 6) not in vis_occ

    def test_occlusion_subset(self, walled_map):
        for x in [(0, 0), (1, 3), (8, 4)]:
            occ = visibility_set(walled_map, x, 0.6, occlusion=True)
            free = visibility_set(walled_map, x, 0.6, occlusion=False)
            assert occ <= free

    def test_matches_defining_predicate(self, walled_map):
        x = (2, 2)
        r_vis = 0.45
        vis = visibility_set(walled_map, x, r_vis)
        for r in range(walled_map.height):
            for c in range(walled_map.width):
                expected = euclidean(x, (r, c), 0.1) <= r_vis + 1e-12
                assert ((r, c) in vis) == expected


class TestDistanceOracle:
    def test_symmetric_zero_diagonal(self, walled_map):
        oracle = DistanceOracle(walled_map)
        points = [(0, 0), (0, 9), (9, 0), (5, 5)]
        m = oracle.matrix(points)
        assert np.allclose(m, m.T)
        assert np.all(np.diag(m) == 0.0)

    def test_triangle_inequality(self, walled_map):
        oracle = DistanceOracle(walled_map)
        cells = walled_map.feasible_cells()
        rng = np.random.default_rng(11)
        for _ in range(50):
            a, b, c = (cells[rng.integers(len(cells))] for _ in range(3))
            ab = oracle.distance(a, b)
            bc = oracle.distance(b, c)
            ac = oracle.distance(a, c)
            assert ac <= ab + bc + 1e-9

    def test_agrees_with_astar(self, walled_map):
        oracle = DistanceOracle(walled_map)
        assert oracle.distance((0, 0), (0, 9)) == pytest.approx(
            astar_distance(walled_map, (0, 0), (0, 9))
        )

    def test_diameter_finite_on_connected(self, empty10):
        oracle = DistanceOracle(empty10)
        assert math.isfinite(oracle.diameter(empty10.feasible_cells()[::7]))


class TestComponent:
    def test_restricted_to_reachable(self):
        m = parse_map(".#.\n.#.\n.#.")
        comp = m.component((0, 0))
        assert set(comp) == {(0, 0), (1, 0), (2, 0)}

import numpy as np
import pytest

from objsearch.gridmap import OccupancyMap, parse_map


@pytest.fixture
def empty10():
    return OccupancyMap(np.ones((10, 10), dtype=bool))


@pytest.fixture
def walled_map():
    # corridor detour: a wall splits the room except for a gap at the bottom
    text = "\n".join([
        "..........",
        "....#.....",
        "....#.....",
        "....#.....",
        "....#.....",
        "....#.....",
        "....#.....",
        "....#.....",
        "..........",
        "..........",
    ])
    return parse_map(text)


def random_map(rng, h, w, p_obstacle=0.2):
    grid = rng.random((h, w)) > p_obstacle
    grid[0, 0] = True
    return OccupancyMap(grid)

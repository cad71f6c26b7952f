"""Object-search planning on 2D occupancy maps."""

from ._kernels import USING_NUMBA
from .bandit import BanditHyper, BanditState, GenLinBandit, theoretical_alpha
from .features import FeatureConfig, build_phi, sigmoid, sinusoidal_pe
from .gridmap import (
    DistanceOracle,
    FurnitureRegion,
    MapError,
    OccupancyMap,
    astar_distance,
    parse_map,
    visibility_set,
    wall_distance,
)
from .planner import Plan, SolverBudget, greedy_plan, tsp_baseline, wmlp_exact
from .sampling import VantageSet, coverage_radius, farthest_point_sample
from .simulator import EpisodeConfig, SpawnModel, augment_positives

__all__ = [
    "USING_NUMBA",
    "BanditHyper",
    "BanditState",
    "GenLinBandit",
    "theoretical_alpha",
    "FeatureConfig",
    "build_phi",
    "sigmoid",
    "sinusoidal_pe",
    "DistanceOracle",
    "FurnitureRegion",
    "MapError",
    "OccupancyMap",
    "astar_distance",
    "parse_map",
    "visibility_set",
    "wall_distance",
    "Plan",
    "SolverBudget",
    "greedy_plan",
    "tsp_baseline",
    "wmlp_exact",
    "VantageSet",
    "coverage_radius",
    "farthest_point_sample",
    "EpisodeConfig",
    "SpawnModel",
    "augment_positives",
]

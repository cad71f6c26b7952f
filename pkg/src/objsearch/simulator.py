"""Episode simulation: object spawning, plan traversal, signal generation,
and the train/evaluate loops around the bandit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import metrics, planner
from .features import build_phi
from .gridmap import MapError, euclidean, _line_of_sight


@dataclass(frozen=True)
class Signal:
    point: tuple
    value: int
    object: int

    def __post_init__(self):
        if self.value not in (1, -1):
            raise ValueError("signal value must be +1 or -1")


@dataclass(frozen=True)
class SpawnModel:
    """Per-class distribution over furniture ids; objects rest uniformly on
    the chosen furniture's surface."""

    probs: dict
    peaky: bool = False

    def __post_init__(self):
        for i, dist in self.probs.items():
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"class {i} spawn probabilities sum to {total}")
            if any(p < 0 for p in dist.values()):
                raise ValueError(f"class {i} has negative spawn probability")
            if self.peaky:
                ones = [f for f, p in dist.items() if p == 1.0]
                if len(ones) != 1 or len([p for p in dist.values() if p > 0]) != 1:
                    raise ValueError(
                        f"peaky spawn model requires exactly one furniture with "
                        f"probability 1 for class {i}"
                    )

    def validate_against(self, occ_map):
        for i, dist in self.probs.items():
            for fid in dist:
                if fid not in occ_map.furniture:
                    raise MapError(f"class {i} references unknown furniture {fid!r}")

    def class_probs(self, i):
        return self.probs[i]

    def spawn(self, occ_map, i, rng):
        """Draw a furniture by its probability, then a uniform surface cell."""
        dist = self.probs[i]
        fids = sorted(dist)
        p = np.array([dist[f] for f in fids])
        fid = fids[int(rng.choice(len(fids), p=p))]
        surface = sorted(occ_map.furniture[fid].surface_cells)
        if not surface:
            raise MapError(f"furniture {fid!r} has an empty surface")
        return surface[int(rng.integers(len(surface)))]


@dataclass(frozen=True)
class EpisodeConfig:
    r_vis_train: float = 1.0
    r_vis_eval: float = 2.5
    failure_prob: float = 0.0
    loss_cap: float | None = None  # None: k*(k+1)*D_M at simulator build
    occlusion: bool = False

    def __post_init__(self):
        if self.r_vis_train <= 0 or self.r_vis_eval <= 0:
            raise ValueError("visibility ranges must be positive")
        if not 0.0 <= self.failure_prob < 1.0:
            raise ValueError("failure_prob must lie in [0, 1)")


@dataclass(frozen=True)
class EpisodeRecord:
    object_id: int
    spawn_cell: tuple
    start_cell: tuple
    plan: planner.Plan
    visited: int  # planned points traversed (spotting one included)
    signals: tuple
    failure: bool
    loss: float
    success: bool
    shortest_path: float


def augment_positives(occ_map, y, r_vis, pool=None):
    """Feasible cells within r_vis meters of ``y``, as +1 signal points.

    ``pool`` restricts the candidates (e.g. to the vantage set); by default
    every feasible cell qualifies. Sorted by (row, col).
    """
    if pool is None:
        pool = occ_map.feasible_cells()
    radius_cells = r_vis / occ_map.cell_size
    return [
        cell for cell in sorted(pool)
        if occ_map.is_feasible(cell) and euclidean(cell, y) <= radius_cells + 1e-9
    ]


class Simulator:
    """Runs single search episodes over a fixed vantage set."""

    def __init__(self, occ_map, oracle, vantage, spawn, config):
        spawn.validate_against(occ_map)
        self.map = occ_map
        self.oracle = oracle
        self.points = vantage.points
        self.spawn = spawn
        self.config = config
        self.component = occ_map.component(self.points[0])
        if config.loss_cap is not None:
            self.loss_cap = config.loss_cap
        else:
            k = len(self.points)
            d_max = max(
                float(np.max(f[np.isfinite(f)]))
                for f in (oracle.field(p) for p in self.points)
            )
            self.loss_cap = k * (k + 1) * d_max

    def visible(self, x, y, r_vis):
        radius_cells = r_vis / self.map.cell_size
        if euclidean(x, y) > radius_cells + 1e-9:
            return False
        if self.config.occlusion and not _line_of_sight(self.map, x, y):
            return False
        return True

    def draw(self, i, rng):
        """Episode randomness in a fixed order: spawn cell, start, failure."""
        y = self.spawn.spawn(self.map, i, rng)
        x0 = self.component[int(rng.integers(len(self.component)))]
        failure = bool(rng.random() < self.config.failure_prob)
        return y, x0, failure

    def shortest_view_distance(self, x0, y, r_vis):
        """Min collision-free distance from x0 to a feasible cell that sees
        ``y`` (the SPL denominator); inf when no such cell is reachable."""
        field_x0 = self.oracle.field(x0)
        radius_cells = r_vis / self.map.cell_size
        r0 = max(0, int(math.floor(y[0] - radius_cells)))
        r1 = min(self.map.height - 1, int(math.ceil(y[0] + radius_cells)))
        c0 = max(0, int(math.floor(y[1] - radius_cells)))
        c1 = min(self.map.width - 1, int(math.ceil(y[1] + radius_cells)))
        rr, cc = np.meshgrid(
            np.arange(r0, r1 + 1), np.arange(c0, c1 + 1), indexing="ij"
        )
        in_range = (rr - y[0]) ** 2 + (cc - y[1]) ** 2 <= radius_cells**2 + 1e-9
        ok = in_range & self.map.grid[r0 : r1 + 1, c0 : c1 + 1]
        if self.config.occlusion:
            for r, c in zip(rr[ok].tolist(), cc[ok].tolist()):
                if not _line_of_sight(self.map, (r, c), y):
                    ok[r - r0, c - c0] = False
        d = field_x0[r0 : r1 + 1, c0 : c1 + 1][ok]
        return float(np.min(d)) if d.size else math.inf

    def execute_plan(self, i, plan, y, x0, failure, r_vis):
        """Traverse an existing plan and produce the full episode record."""
        shortest = self.shortest_view_distance(x0, y, r_vis)
        ordered = plan.ordered_points
        if failure:
            return EpisodeRecord(
                object_id=i, spawn_cell=y, start_cell=x0, plan=plan,
                visited=len(ordered),
                signals=tuple(Signal(p, -1, i) for p in ordered),
                failure=True, loss=self.loss_cap, success=False,
                shortest_path=shortest,
            )
        if self.visible(x0, y, r_vis):
            return EpisodeRecord(
                object_id=i, spawn_cell=y, start_cell=x0, plan=plan,
                visited=0, signals=(Signal(x0, 1, i),),
                failure=False, loss=0.0, success=True, shortest_path=shortest,
            )
        signals = []
        loss = 0.0
        prev = x0
        for ell, point in enumerate(ordered, start=1):
            loss += self.oracle.distance(prev, point)
            prev = point
            if self.visible(point, y, r_vis):
                signals.append(Signal(point, 1, i))
                return EpisodeRecord(
                    object_id=i, spawn_cell=y, start_cell=x0, plan=plan,
                    visited=ell, signals=tuple(signals), failure=False,
                    loss=loss, success=True, shortest_path=shortest,
                )
            signals.append(Signal(point, -1, i))
        return EpisodeRecord(
            object_id=i, spawn_cell=y, start_cell=x0, plan=plan,
            visited=len(ordered), signals=tuple(signals), failure=False,
            loss=self.loss_cap, success=False, shortest_path=shortest,
        )

    def run_episode(self, i, weights, planner_fn, rng, r_vis):
        y, x0, failure = self.draw(i, rng)
        plan = planner_fn(self.points, weights, self.oracle, x0)
        return self.execute_plan(i, plan, y, x0, failure, r_vis)


def make_planner_fn(kind, alpha_p=0.5, budget=None):
    """Planner callable (points, weights, oracle, start) -> Plan."""
    if kind == "exact":
        return lambda pts, w, oracle, start: planner.wmlp_exact(
            pts, w, oracle, start, budget=budget
        )
    if kind == "greedy":
        return lambda pts, w, oracle, start: planner.greedy_plan(
            pts, w, oracle, start, alpha_p=alpha_p
        )
    if kind == "tsp":
        return lambda pts, w, oracle, start: planner.tsp_baseline(pts, oracle, start)
    raise ValueError(f"unknown planner kind {kind!r}")


class PhiCache:
    """Per-class feature matrices over the vantage points."""

    def __init__(self, occ_map, feat_cfg, points):
        self.map = occ_map
        self.cfg = feat_cfg
        self.points = points
        self._matrices = {}
        self._extra = {}

    def matrix(self, i):
        m = self._matrices.get(i)
        if m is None:
            m = np.stack([build_phi(self.map, self.cfg, i, x) for x in self.points])
            self._matrices[i] = m
        return m

    def phi(self, i, x):
        key = (i, x)
        v = self._extra.get(key)
        if v is None:
            v = build_phi(self.map, self.cfg, i, x)
            self._extra[key] = v
        return v


def bandit_score_fn(bandit, phi_cache):
    return lambda i: bandit.state_for(i).lcb_scores(phi_cache.matrix(i))


def train(sim, bandit, phi_cache, planner_fn, n_episodes, seed,
          gt_probs=None, ledger=None, bench_budget=None):
    """Online training loop. Returns per-episode records.

    Successful episodes feed the observed signal prefix plus augmented
    positives (all vantage cells seeing the object) to the bandit; failed or
    all-negative episodes leave the state untouched. When ``gt_probs`` (per
    class score vectors) and ``ledger`` are given, per-episode expected losses
    against the informed exact planner are recorded.
    """
    n_objects = bandit.n_objects
    records = []
    score_fn = bandit_score_fn(bandit, phi_cache)
    for t in range(n_episodes):
        rng = np.random.default_rng([seed, t])
        i = int(rng.integers(n_objects))
        y, x0, failure = sim.draw(i, rng)
        weights = score_fn(i)
        plan = planner_fn(sim.points, weights, sim.oracle, x0)
        rec = sim.execute_plan(i, plan, y, x0, failure, sim.config.r_vis_train)
        if rec.success:
            signals = list(rec.signals)
            spotted = signals[-1].point
            extra = [
                p for p in augment_positives(
                    sim.map, y, sim.config.r_vis_train, pool=sim.points
                )
                if p != spotted
            ]
            signals.extend(Signal(p, 1, i) for p in extra)
            feats = [phi_cache.phi(i, s.point) for s in signals]
            bandit.update(i, feats, [s.value for s in signals])
        if ledger is not None and gt_probs is not None:
            learner_e = metrics.expected_path_length(
                plan, gt_probs[i], sim.config.failure_prob, sim.loss_cap
            )
            bench = metrics.benchmark_plan(
                sim.points, gt_probs[i], sim.oracle, x0, budget=bench_budget
            )
            bench_e = metrics.expected_path_length(
                bench, gt_probs[i], sim.config.failure_prob, sim.loss_cap
            )
            ledger.add(learner_e, bench_e)
        records.append(rec)
    return records


def evaluate(sim, score_fn, planner_fn, n_objects, n_episodes, seed,
             episode_indices=None):
    """Frozen-parameter evaluation episodes at the evaluation visibility
    range. Episode randomness depends only on (seed, episode index), so runs
    are comparable across planners and parallelizable across index chunks."""
    indices = range(n_episodes) if episode_indices is None else episode_indices
    records = []
    for t in indices:
        rng = np.random.default_rng([seed, t])
        i = int(rng.integers(n_objects))
        y, x0, failure = sim.draw(i, rng)
        weights = score_fn(i)
        plan = planner_fn(sim.points, weights, sim.oracle, x0)
        records.append(
            sim.execute_plan(i, plan, y, x0, failure, sim.config.r_vis_eval)
        )
    return records

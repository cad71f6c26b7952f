"""Vantage point ordering: exact weighted-latency solver, one-step greedy,
and a purely geometric TSP baseline.

The exact solver runs a subset DP (exact up to ``DP_MAX_K`` points) and falls
back to an anytime branch-and-bound seeded by the greedy solution for larger
instances, honoring a time/node budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ._kernels import path_dp

DP_MAX_K = 20


class PlannerError(ValueError):
    pass


@dataclass(frozen=True)
class SolverBudget:
    time_limit: float | None = 30.0
    node_limit: int | None = None

    def __post_init__(self):
        if self.time_limit is None and self.node_limit is None:
            raise PlannerError("at least one of time_limit/node_limit must be set")


@dataclass(frozen=True)
class Plan:
    """Visit order over vantage points with weights, latencies and objective.

    ``order`` holds 0-based indices into ``points``; the implicit start node
    precedes them all.
    """

    order: tuple
    points: tuple
    scores: tuple
    cumulative_latency: tuple
    objective: float
    optimal: bool = True

    @property
    def ordered_points(self):
        return tuple(self.points[i] for i in self.order)


def _check_instance(points, weights):
    if len(points) == 0:
        raise PlannerError("need at least one point")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(points),):
        raise PlannerError("weights must match points")
    if np.any(weights < 0) or np.any(weights > 1):
        raise PlannerError("weights must lie in [0, 1]")
    return weights


def distance_matrix(points, oracle, start):
    """(k+1)x(k+1) matrix with index 0 the start; raises on infinite entries."""
    nodes = [start, *points]
    d = oracle.matrix(nodes)
    if not np.all(np.isfinite(d)):
        raise PlannerError("some points are mutually unreachable")
    return d


def evaluate_order(order, dist, weights):
    """(objective, cumulative latencies) of visiting ``order`` from node 0."""
    latency = 0.0
    prev = 0
    objective = 0.0
    latencies = []
    for idx in order:
        latency += dist[prev, idx + 1]
        latencies.append(latency)
        objective += weights[idx] * latency
        prev = idx + 1
    return objective, tuple(latencies)


def _make_plan(order, points, weights, dist, optimal=True):
    objective, latencies = evaluate_order(order, dist, weights)
    return Plan(
        order=tuple(int(i) for i in order),
        points=tuple(points),
        scores=tuple(float(w) for w in weights),
        cumulative_latency=latencies,
        objective=float(objective),
        optimal=optimal,
    )


def wmlp_exact(points, weights, oracle, start, budget=None, dist=None):
    """Minimize the weighted sum of arrival distances over all visit orders.

    Exact subset DP for k <= DP_MAX_K; anytime branch-and-bound beyond, which
    returns the best incumbent (``optimal`` flag cleared when the budget ran
    out first).
    """
    weights = _check_instance(points, weights)
    if dist is None:
        dist = distance_matrix(points, oracle, start)
    k = len(points)
    if k <= DP_MAX_K:
        order, _ = path_dp(dist, weights, True)
        return _make_plan(order, points, weights, dist)
    budget = budget or SolverBudget()
    order, optimal = _branch_and_bound(dist, weights, budget)
    return _make_plan(order, points, weights, dist, optimal=optimal)


def _greedy_wmlp_order(dist, weights):
    # incumbent heuristic: repeatedly append the point minimizing the
    # incremental weighted-latency cost of the remaining set
    k = len(weights)
    remaining = set(range(k))
    order = []
    latency = 0.0
    prev = 0
    wrem = float(np.sum(weights))
    while remaining:
        best = None
        best_cost = math.inf
        for idx in sorted(remaining):
            cost = dist[prev, idx + 1] * wrem
            if cost < best_cost - 1e-15:
                best, best_cost = idx, cost
        order.append(best)
        latency += dist[prev, best + 1]
        wrem -= weights[best]
        remaining.remove(best)
        prev = best + 1
    return order


def _branch_and_bound(dist, weights, budget):
    k = len(weights)
    deadline = (
        time.monotonic() + budget.time_limit if budget.time_limit is not None else None
    )
    node_limit = budget.node_limit if budget.node_limit is not None else math.inf
    incumbent = list(_greedy_wmlp_order(dist, weights))
    best_obj, _ = evaluate_order(incumbent, dist, weights)
    # per-point lower bound ingredient: cheapest possible approach edge
    d_in = np.min(np.where(np.eye(k + 1, dtype=bool), np.inf, dist), axis=0)[1:]
    nodes_seen = 0
    exhausted = False

    # iterative DFS; frame = (prev node, visited mask, latency, cost)
    stack = [(0, 0, 0.0, 0.0, iter(range(k)))]
    full = (1 << k) - 1
    path = []
    while stack:
        nodes_seen += 1
        if nodes_seen % 256 == 0 and deadline is not None and time.monotonic() > deadline:
            exhausted = True
            break
        if nodes_seen > node_limit:
            exhausted = True
            break
        prev, mask, latency, cost, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            if path:
                path.pop()
            continue
        if (mask >> nxt) & 1:
            continue
        nl = latency + dist[prev, nxt + 1]
        nc = cost + weights[nxt] * nl
        nm = mask | (1 << nxt)
        if nm == full:
            if nc < best_obj - 1e-12:
                best_obj = nc
                incumbent = path + [nxt]
            continue
        # bound: every unvisited point waits at least nl + its cheapest edge
        bound = nc
        for j in range(k):
            if (nm >> j) & 1 == 0:
                bound += weights[j] * (nl + d_in[j])
        if bound >= best_obj - 1e-12:
            continue
        path.append(nxt)
        stack.append((nxt + 1, nm, nl, nc, iter(range(k))))
    return incumbent, not exhausted


def greedy_next(current, unvisited, scores, oracle, alpha_p):
    """Next point maximizing alpha_p / dist + (1 - alpha_p) * score; ties go to
    the lowest point index."""
    if not unvisited:
        raise PlannerError("no unvisited points")
    if not 0.0 <= alpha_p <= 1.0:
        raise PlannerError("alpha_p must lie in [0, 1]")
    best = None
    best_val = -math.inf
    for idx, point in sorted(unvisited.items()):
        d = oracle.distance(current, point)
        if d == 0.0:
            # standing on the point: infinitely attractive, take it now
            return idx
        val = alpha_p / d + (1.0 - alpha_p) * scores[idx]
        if val > best_val + 1e-15:
            best, best_val = idx, val
    return best


def greedy_plan(points, scores, oracle, start, alpha_p):
    """Iterated one-step greedy ordering of all points."""
    weights = _check_instance(points, scores)
    unvisited = dict(enumerate(points))
    current = start
    order = []
    while unvisited:
        idx = greedy_next(current, unvisited, weights, oracle, alpha_p)
        order.append(idx)
        current = unvisited.pop(idx)
    dist = distance_matrix(points, oracle, start)
    return _make_plan(order, points, weights, dist)


def _two_opt(order, dist):
    # open-path 2-opt: reverse segments while the tour length decreases
    order = list(order)

    def length(o):
        total = 0.0
        prev = 0
        for idx in o:
            total += dist[prev, idx + 1]
            prev = idx + 1
        return total

    best_len = length(order)
    improved = True
    while improved:
        improved = False
        for i in range(len(order) - 1):
            for j in range(i + 1, len(order)):
                cand = order[:i] + order[i : j + 1][::-1] + order[j + 1 :]
                cl = length(cand)
                if cl < best_len - 1e-12:
                    order, best_len = cand, cl
                    improved = True
    return order


def tsp_baseline(points, oracle, start, dist=None):
    """Shortest open tour from the start through all points, ignoring scores
    (uniform 1/k weights are recorded in the resulting plan)."""
    if len(points) == 0:
        raise PlannerError("need at least one point")
    if dist is None:
        dist = distance_matrix(points, oracle, start)
    k = len(points)
    if k <= DP_MAX_K:
        order, _ = path_dp(dist, np.ones(k), False)
    else:
        # nearest neighbor seed + 2-opt refinement
        remaining = set(range(k))
        order = []
        prev = 0
        while remaining:
            nxt = min(remaining, key=lambda j: (dist[prev, j + 1], j))
            order.append(nxt)
            remaining.remove(nxt)
            prev = nxt + 1
        order = _two_opt(order, dist)
    weights = np.full(k, 1.0 / k)
    return _make_plan(order, points, weights, dist)


def solver_bench(ks, instance_gen, budget=None, solvers=("exact", "greedy", "tsp")):
    """Wall-clock comparison rows (k, solver, seconds, optimal) over random
    instances from ``instance_gen(k) -> (points, weights, oracle, start)``."""
    rows = []
    for k in ks:
        points, weights, oracle, start = instance_gen(k)
        dist = distance_matrix(points, oracle, start)
        for solver in solvers:
            t0 = time.perf_counter()
            if solver == "exact":
                plan = wmlp_exact(points, weights, oracle, start, budget=budget, dist=dist)
            elif solver == "greedy":
                plan = greedy_plan(points, weights, oracle, start, alpha_p=0.5)
            elif solver == "tsp":
                plan = tsp_baseline(points, oracle, start, dist=dist)
            else:
                raise PlannerError(f"unknown solver {solver!r}")
            rows.append((k, solver, time.perf_counter() - t0, plan.optimal))
    return rows

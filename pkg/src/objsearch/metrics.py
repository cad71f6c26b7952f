"""Ground-truth spotting likelihoods, expected path length, SPL, and regret."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridmap import euclidean
from .planner import wmlp_exact


def gt_spot_probability(occ_map, spawn, i, x, r_vis):
    """Probability that an object of class ``i`` is visible from cell ``x``:
    sum over furniture of spawn probability times the visible surface
    fraction."""
    total = 0.0
    radius_cells = r_vis / occ_map.cell_size
    for fid, p in spawn.class_probs(i).items():
        surface = sorted(occ_map.furniture[fid].surface_cells)
        if not surface:
            continue
        n_vis = sum(
            1 for cell in surface
            if euclidean(cell, x) <= radius_cells + 1e-9
        )
        total += p * n_vis / len(surface)
    return total


def gt_score_vector(occ_map, spawn, i, points, r_vis):
    return np.array([
        gt_spot_probability(occ_map, spawn, i, x, r_vis) for x in points
    ])


def expected_path_length(plan, gt_probs, failure_prob, loss_cap):
    """Average path length of a plan under ground-truth spotting
    probabilities, ignoring visibility-ball overlap."""
    gt_probs = np.asarray(gt_probs, dtype=float)
    if gt_probs.shape != (len(plan.points),):
        raise ValueError("gt_probs must align with plan.points")
    inner = sum(
        gt_probs[idx] * lat for idx, lat in zip(plan.order, plan.cumulative_latency)
    )
    return failure_prob * loss_cap + (1.0 - failure_prob) * inner


def benchmark_plan(points, gt_probs, oracle, start, budget=None):
    """Exact weighted-latency plan using ground-truth probabilities as
    weights (the informed planner regret is measured against)."""
    return wmlp_exact(points, gt_probs, oracle, start, budget=budget)


def spl_term(success, shortest, realized):
    """Per-episode SPL contribution."""
    if shortest < 0 or realized < 0:
        raise ValueError("path lengths must be non-negative")
    if not success:
        return 0.0
    if shortest == 0.0 and realized == 0.0:
        return 1.0
    return shortest / max(shortest, realized)


@dataclass(frozen=True)
class MetricSummary:
    episodes: int
    success_rate: float
    spl: float
    mean_loss: float


def summarize(records):
    """Aggregate success rate, SPL and mean realized loss over episodes."""
    if not records:
        raise ValueError("no episode records")
    n = len(records)
    succ = sum(1 for r in records if r.success) / n
    spl = sum(
        spl_term(r.success, r.shortest_path, r.loss) for r in records
    ) / n
    loss = sum(r.loss for r in records) / n
    return MetricSummary(episodes=n, success_rate=succ, spl=spl, mean_loss=loss)


class RegretLedger:
    """Per-episode expected losses of the learner vs. the informed benchmark."""

    def __init__(self):
        self.learner = []
        self.benchmark = []

    def add(self, learner_expected, benchmark_expected):
        self.learner.append(float(learner_expected))
        self.benchmark.append(float(benchmark_expected))

    @property
    def cumulative(self):
        return float(np.sum(np.asarray(self.learner) - np.asarray(self.benchmark)))

    def curve(self):
        """Rows (t, R_t, R_t / t) for t = 1..T."""
        diffs = np.asarray(self.learner) - np.asarray(self.benchmark)
        running = np.cumsum(diffs)
        return [
            (t + 1, float(running[t]), float(running[t] / (t + 1)))
            for t in range(len(diffs))
        ]


def heatmap_svg(occ_map, values, path, cell_px=6):
    """Write a per-cell score heatmap as a standalone SVG.

    ``values`` maps cells to scores in [0, 1]; unlisted feasible cells are
    blank, obstacles dark gray, furniture outlined in gray.
    """
    h, w = occ_map.height, occ_map.width
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell_px}" '
        f'height="{h * cell_px}" viewBox="0 0 {w * cell_px} {h * cell_px}">',
        f'<rect width="{w * cell_px}" height="{h * cell_px}" fill="#ffffff"/>',
    ]
    furniture_cells = set()
    for f in occ_map.furniture.values():
        furniture_cells |= f.cells
    for r in range(h):
        for c in range(w):
            cell = (r, c)
            if not occ_map.grid[r, c]:
                fill = "#b08968" if cell in furniture_cells else "#333333"
            elif cell in values:
                v = min(max(values[cell], 0.0), 1.0)
                red = int(255 * v)
                blue = int(255 * (1.0 - v))
                fill = f"#{red:02x}40{blue:02x}"
            else:
                continue
            lines.append(
                f'<rect x="{c * cell_px}" y="{r * cell_px}" '
                f'width="{cell_px}" height="{cell_px}" fill="{fill}"/>'
            )
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

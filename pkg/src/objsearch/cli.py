"""Command line entry point: train, eval, plan and bench subcommands."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import metrics, planner, simulator
from .bandit import GenLinBandit
from .config import ConfigError, Scenario, ScenarioConfig, load_scenario
from .features import build_phi
from .gridmap import DistanceOracle, MapError, OccupancyMap

log = logging.getLogger("objsearch")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return x


def _episode_rows(records):
    rows = []
    for t, r in enumerate(records):
        rows.append([
            t, r.object_id,
            f"{r.spawn_cell[0]}:{r.spawn_cell[1]}",
            f"{r.start_cell[0]}:{r.start_cell[1]}",
            int(r.success), int(r.failure), r.visited,
            _fmt(r.loss),
            _fmt(r.shortest_path if math.isfinite(r.shortest_path) else -1.0),
            _fmt(metrics.spl_term(r.success, r.shortest_path, r.loss)),
        ])
    return rows


_EPISODE_HEADER = [
    "episode", "object", "spawn", "start", "success", "failure",
    "visited", "loss", "shortest", "spl",
]


def _summary_rows(records):
    s = metrics.summarize(records)
    return (
        ["episodes", "success_rate", "spl", "mean_loss"],
        [[s.episodes, _fmt(s.success_rate), _fmt(s.spl), _fmt(s.mean_loss)]],
    )


def _sample_hypers(rng):
    """One random draw from the documented tuning ranges. The positional
    encoding dimension is restricted to the even range members."""
    return {
        "eta": float(10.0 ** rng.uniform(-2.0, 2.0)),
        "alpha": float(rng.uniform(0.1, 10.0)),
        "alpha_p": float(rng.uniform(0.1, 0.9)),
        "pe_dim": int(rng.choice([10, 20, 30, 50])),
        "patch_cells": int(rng.choice([37, 75, 150])),
        "sigmoid_scale": float(rng.uniform(10.0, 20.0)),
    }


def _apply_hypers(cfg, draw):
    data = cfg.to_dict()
    data["bandit"] = dict(cfg.bandit, eta=draw["eta"], alpha=draw["alpha"])
    data["features"] = dict(
        cfg.features, pe_dim=draw["pe_dim"], patch_cells=draw["patch_cells"],
        sigmoid_scale=draw["sigmoid_scale"],
    )
    data["planner"] = dict(cfg.planner, alpha_p=draw["alpha_p"])
    return ScenarioConfig.from_dict(data)


def _random_search(scn, args, seed, n_episodes):
    """Train once per sampled hyperparameter draw, keep the best train SPL."""
    base_dir = os.path.dirname(os.path.abspath(args.scenario))
    rng = np.random.default_rng([seed, 0xA6])
    draws = [_sample_hypers(rng) for _ in range(args.random_search)]
    rows = []
    best = None
    for n, draw in enumerate(draws):
        cand_cfg = _apply_hypers(scn.config, draw)
        cand = Scenario(cand_cfg, base_dir=base_dir)
        bandit = cand.new_bandit()
        planner_fn = simulator.make_planner_fn(
            "greedy", alpha_p=cand.alpha_p,
        )
        records = simulator.train(
            cand.simulator, bandit, cand.phi_cache, planner_fn, n_episodes, seed
        )
        spl = metrics.summarize(records).spl
        log.info("random-search draw %d: SPL %.4f %s", n, spl, draw)
        rows.append([n, _fmt(draw["eta"]), _fmt(draw["alpha"]),
                     _fmt(draw["alpha_p"]), draw["pe_dim"],
                     draw["patch_cells"], _fmt(draw["sigmoid_scale"]),
                     _fmt(spl)])
        if best is None or spl > best[0]:
            best = (spl, bandit, records, cand_cfg)
    _write_csv(
        os.path.join(args.out, "random_search.csv"),
        ["draw", "eta", "alpha", "alpha_p", "pe_dim", "patch_cells",
         "sigmoid_scale", "train_spl"],
        rows,
    )
    # the winner may use different feature dimensions than the input
    # scenario, so persist a matching scenario (with an absolute map path,
    # since it lands outside the original scenario directory) for later evals
    data = best[3].to_dict()
    if not os.path.isabs(data["map"]):
        data["map"] = os.path.join(base_dir, data["map"])
    ScenarioConfig.from_dict(data).save(
        os.path.join(args.out, "best_scenario.yaml")
    )
    return best[1], best[2]


def cmd_train(args):
    scn = load_scenario(args.scenario)
    seed = scn.config.seed if args.seed is None else args.seed
    n_episodes = scn.config.train_episodes if args.episodes is None else args.episodes
    os.makedirs(args.out, exist_ok=True)
    if args.random_search:
        bandit, records = _random_search(scn, args, seed, n_episodes)
        bandit.save(os.path.join(args.out, "checkpoint.json"))
        _write_csv(os.path.join(args.out, "train_episodes.csv"),
                   _EPISODE_HEADER, _episode_rows(records))
        header, rows = _summary_rows(records)
        _write_csv(os.path.join(args.out, "train_summary.csv"), header, rows)
        s = metrics.summarize(records)
        print(f"train: best of {args.random_search} draws, "
              f"{s.episodes} episodes, success {s.success_rate:.3f}, "
              f"SPL {s.spl:.3f}")
        return 0
    bandit = scn.new_bandit()
    planner_fn = simulator.make_planner_fn(
        args.planner or scn.planner_kind, alpha_p=scn.alpha_p,
        budget=planner.SolverBudget(time_limit=scn.time_limit),
    )
    ledger = metrics.RegretLedger() if args.track_regret else None
    gt = None
    if args.track_regret:
        gt = {
            i: metrics.gt_score_vector(
                scn.map, scn.spawn, i, scn.vantage.points,
                scn.episode_config.r_vis_train,
            )
            for i in range(len(scn.object_names))
        }
    records = simulator.train(
        scn.simulator, bandit, scn.phi_cache, planner_fn, n_episodes, seed,
        gt_probs=gt, ledger=ledger,
    )
    bandit.save(os.path.join(args.out, "checkpoint.json"))
    _write_csv(os.path.join(args.out, "train_episodes.csv"),
               _EPISODE_HEADER, _episode_rows(records))
    header, rows = _summary_rows(records)
    _write_csv(os.path.join(args.out, "train_summary.csv"), header, rows)
    if ledger is not None:
        _write_csv(
            os.path.join(args.out, "regret.csv"),
            ["t", "cumulative", "average"],
            [[t, _fmt(r), _fmt(a)] for t, r, a in ledger.curve()],
        )
    s = metrics.summarize(records)
    print(f"train: {s.episodes} episodes, success {s.success_rate:.3f}, "
          f"SPL {s.spl:.3f}")
    return 0


def _score_source(scn, args):
    """Resolve the weight source for evaluation.

    The score-blind --tsp baseline takes precedence over a supplied
    --checkpoint (the checkpoint is simply unused); combining --tsp with
    --gt-scores, or giving no source at all, is an error.
    """
    if args.tsp:
        if args.gt_scores:
            raise ConfigError("--tsp and --gt-scores are mutually exclusive")
        k = scn.vantage.k
        return "tsp", lambda i: np.full(k, 1.0 / k)
    n_sources = sum([args.checkpoint is not None, args.gt_scores])
    if n_sources != 1:
        raise ConfigError(
            "exactly one of --checkpoint, --gt-scores, --tsp is required"
        )
    if args.gt_scores:
        gt = {
            i: metrics.gt_score_vector(
                scn.map, scn.spawn, i, scn.vantage.points,
                scn.episode_config.r_vis_eval,
            )
            for i in range(len(scn.object_names))
        }
        return None, lambda i: gt[i]
    bandit = GenLinBandit.load(args.checkpoint)
    return None, simulator.bandit_score_fn(bandit, scn.phi_cache)


def _eval_chunk(scenario_path, args_dict, indices):
    # worker entry for --jobs > 1; rebuilds the scenario per process
    scn = load_scenario(scenario_path)
    ns = argparse.Namespace(**args_dict)
    forced_kind, score_fn = _score_source(scn, ns)
    kind = forced_kind or ns.planner or scn.planner_kind
    planner_fn = simulator.make_planner_fn(
        kind, alpha_p=scn.alpha_p,
        budget=planner.SolverBudget(time_limit=scn.time_limit),
    )
    seed = scn.config.seed if ns.seed is None else ns.seed
    return simulator.evaluate(
        scn.simulator, score_fn, planner_fn, len(scn.object_names),
        ns.episodes, seed, episode_indices=indices,
    )


def cmd_eval(args):
    scn = load_scenario(args.scenario)
    seed = scn.config.seed if args.seed is None else args.seed
    n_episodes = scn.config.eval_episodes if args.episodes is None else args.episodes
    os.makedirs(args.out, exist_ok=True)
    args_dict = {
        "checkpoint": args.checkpoint, "gt_scores": args.gt_scores,
        "tsp": args.tsp, "planner": args.planner, "seed": args.seed,
        "episodes": n_episodes,
    }
    if args.jobs > 1:
        chunks = [list(range(j, n_episodes, args.jobs)) for j in range(args.jobs)]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(
                _eval_chunk, [args.scenario] * args.jobs,
                [args_dict] * args.jobs, chunks,
            ))
        indexed = {}
        for chunk, recs in zip(chunks, results):
            indexed.update(zip(chunk, recs))
        records = [indexed[t] for t in range(n_episodes)]
    else:
        records = _eval_chunk(args.scenario, args_dict, range(n_episodes))
    _write_csv(os.path.join(args.out, "eval_episodes.csv"),
               _EPISODE_HEADER, _episode_rows(records))
    header, rows = _summary_rows(records)
    _write_csv(os.path.join(args.out, "eval_summary.csv"), header, rows)
    _write_heatmaps(scn, args)
    s = metrics.summarize(records)
    print(f"eval: {s.episodes} episodes, success {s.success_rate:.3f}, "
          f"SPL {s.spl:.3f}")
    return 0


def _write_heatmaps(scn, args):
    """One SVG per object class with per-cell likelihood scores."""
    if args.tsp:
        return
    cells = scn.map.component(scn.vantage.points[0])
    if args.gt_scores:
        def score_cells(i):
            return metrics.gt_score_vector(
                scn.map, scn.spawn, i, cells, scn.episode_config.r_vis_eval
            )
    else:
        bandit = GenLinBandit.load(args.checkpoint)

        def score_cells(i):
            phi = np.stack([
                build_phi(scn.map, scn.feature_config, i, x) for x in cells
            ])
            return bandit.state_for(i).lcb_scores(phi)

    for i, name in enumerate(scn.object_names):
        values = dict(zip(cells, score_cells(i).tolist()))
        metrics.heatmap_svg(
            scn.map, values, os.path.join(args.out, f"heatmap_{name}.svg")
        )


def cmd_plan(args):
    scn = load_scenario(args.scenario)
    if args.object not in scn.object_names:
        raise ConfigError(
            f"unknown object {args.object!r}; choices: {scn.object_names}"
        )
    i = scn.object_names.index(args.object)
    ns = argparse.Namespace(
        checkpoint=args.checkpoint, gt_scores=args.gt_scores, tsp=args.tsp
    )
    forced_kind, score_fn = _score_source(scn, ns)
    kind = forced_kind or args.planner or scn.planner_kind
    start = tuple(int(v) for v in args.start.split(","))
    planner_fn = simulator.make_planner_fn(
        kind, alpha_p=scn.alpha_p,
        budget=planner.SolverBudget(time_limit=scn.time_limit),
    )
    plan = planner_fn(scn.vantage.points, score_fn(i), scn.oracle, start)
    lines = [f"# plan object={args.object} planner={kind} start={start[0]},{start[1]}"]
    for idx, lat in zip(plan.order, plan.cumulative_latency):
        r, c = plan.points[idx]
        lines.append(f"{r},{c} score={plan.scores[idx]!r} latency={lat!r}")
    lines.append(f"# objective={plan.objective!r} optimal={plan.optimal}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _bench_instance_gen(seed):
    rng = np.random.default_rng(seed)

    def gen(k):
        side = 40
        grid = np.ones((side, side), dtype=bool)
        occ_map = OccupancyMap(grid)
        oracle = DistanceOracle(occ_map)
        cells = [
            (int(r), int(c))
            for r, c in rng.integers(0, side, size=(4 * k, 2))
        ]
        unique = list(dict.fromkeys(cells))
        points = unique[1 : k + 1]
        start = unique[0]
        weights = rng.uniform(0.0, 1.0, size=k)
        return points, weights, oracle, start

    return gen


def cmd_bench(args):
    if args.k_min > args.k_max:
        raise ConfigError("k-min must not exceed k-max")
    budget = planner.SolverBudget(time_limit=args.budget)
    rows = planner.solver_bench(
        range(args.k_min, args.k_max + 1), _bench_instance_gen(args.seed),
        budget=budget,
    )
    out_rows = [[k, solver, _fmt(seconds), int(optimal)]
                for k, solver, seconds, optimal in rows]
    if args.out:
        _write_csv(args.out, ["k", "solver", "seconds", "optimal"], out_rows)
    for row in out_rows:
        print(",".join(str(v) for v in row))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="objsearch",
        description="Object-search planning: learned spotting likelihoods "
        "and minimum expected path length routing on occupancy maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run training episodes and save a checkpoint")
    p_train.add_argument("scenario")
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--episodes", type=int, default=None)
    p_train.add_argument("--planner", choices=["exact", "greedy", "tsp"], default=None)
    p_train.add_argument("--track-regret", action="store_true",
                         help="also record expected losses vs the informed planner")
    p_train.add_argument("--random-search", type=int, default=0, metavar="N",
                         help="train N random hyperparameter draws and keep "
                         "the best by training SPL")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="frozen-parameter evaluation episodes")
    p_eval.add_argument("scenario")
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--checkpoint", default=None)
    p_eval.add_argument("--gt-scores", action="store_true",
                        help="use ground-truth likelihoods as scores")
    p_eval.add_argument("--tsp", action="store_true",
                        help="geometric TSP baseline (ignores scores)")
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.add_argument("--episodes", type=int, default=None)
    p_eval.add_argument("--planner", choices=["exact", "greedy", "tsp"], default=None)
    p_eval.add_argument("--jobs", type=int, default=1)
    p_eval.set_defaults(func=cmd_eval)

    p_plan = sub.add_parser("plan", help="emit one ordered waypoint list")
    p_plan.add_argument("scenario")
    p_plan.add_argument("--object", required=True)
    p_plan.add_argument("--start", required=True, metavar="ROW,COL")
    p_plan.add_argument("--out", default=None)
    p_plan.add_argument("--checkpoint", default=None)
    p_plan.add_argument("--gt-scores", action="store_true")
    p_plan.add_argument("--tsp", action="store_true")
    p_plan.add_argument("--planner", choices=["exact", "greedy", "tsp"], default=None)
    p_plan.set_defaults(func=cmd_plan)

    p_bench = sub.add_parser("bench", help="solver runtime comparison table")
    p_bench.add_argument("--k-min", type=int, required=True)
    p_bench.add_argument("--k-max", type=int, required=True)
    p_bench.add_argument("--budget", type=float, default=30.0)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("OBJSEARCH_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ConfigError, MapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

import csv

import pytest
import yaml

from objsearch.cli import main

MAP_TEXT = "\n".join([
    "..........",
    ".AA.......",
    ".AA.......",
    "..........",
    "......BB..",
    "......BB..",
    "..........",
    "..........",
])

SCENARIO = {
    "map": "room.txt",
    "objects": {
        "mug": {"A": 0.7, "B": 0.3},
        "keys": {"B": 1.0},
    },
    "vantage": {"k": 5, "start": [0, 0]},
    "features": {"patch_cells": 9, "pe_dim": 8},
    "planner": {"kind": "greedy", "alpha_p": 0.5},
    "episodes": {"r_vis_train": 0.5, "r_vis_eval": 1.0},
    "seed": 3,
    "train_episodes": 10,
    "eval_episodes": 15,
}


@pytest.fixture
def scenario_file(tmp_path):
    (tmp_path / "room.txt").write_text(MAP_TEXT + "\n")
    path = tmp_path / "scenario.yaml"
    with open(path, "w") as fh:
        yaml.safe_dump(SCENARIO, fh, sort_keys=False)
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestTrain:
    def test_outputs(self, scenario_file, tmp_path):
        out = tmp_path / "run"
        rc = main(["train", str(scenario_file), "--out", str(out)])
        assert rc == 0
        assert (out / "checkpoint.json").exists()
        episodes = read_csv(out / "train_episodes.csv")
        assert episodes[0] == ["episode", "object", "spawn", "start", "success",
                               "failure", "visited", "loss", "shortest", "spl"]
        assert len(episodes) == 11
        summary = read_csv(out / "train_summary.csv")
        assert summary[0] == ["episodes", "success_rate", "spl", "mean_loss"]
        assert summary[1][0] == "10"

    def test_track_regret(self, scenario_file, tmp_path):
        out = tmp_path / "run"
        rc = main(["train", str(scenario_file), "--out", str(out),
                   "--episodes", "5", "--track-regret"])
        assert rc == 0
        regret = read_csv(out / "regret.csv")
        assert regret[0] == ["t", "cumulative", "average"]
        assert len(regret) == 6

    def test_byte_identical_reruns(self, scenario_file, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["train", str(scenario_file), "--out", str(out_a)])
        main(["train", str(scenario_file), "--out", str(out_b)])
        for name in ("train_episodes.csv", "train_summary.csv", "checkpoint.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_random_search(self, scenario_file, tmp_path):
        out = tmp_path / "run"
        rc = main(["train", str(scenario_file), "--out", str(out),
                   "--episodes", "5", "--random-search", "3"])
        assert rc == 0
        assert (out / "checkpoint.json").exists()
        table = read_csv(out / "random_search.csv")
        assert table[0] == ["draw", "eta", "alpha", "alpha_p", "pe_dim",
                            "patch_cells", "sigmoid_scale", "train_spl"]
        assert len(table) == 4
        # the winning draw's training SPL is what the summary reports
        best_spl = max(float(row[-1]) for row in table[1:])
        summary = read_csv(out / "train_summary.csv")
        assert float(summary[1][2]) == pytest.approx(best_spl)
        # the persisted scenario reflects the winning draw and is evaluable
        best = yaml.safe_load((out / "best_scenario.yaml").read_text())
        assert best["features"]["pe_dim"] in (10, 20, 30, 50)
        rc = main(["eval", str(out / "best_scenario.yaml"),
                   "--out", str(tmp_path / "eval"),
                   "--checkpoint", str(out / "checkpoint.json"),
                   "--episodes", "3"])
        assert rc == 0

    def test_missing_scenario(self, tmp_path):
        rc = main(["train", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o")])
        assert rc == 2


class TestEval:
    def checkpoint(self, scenario_file, tmp_path):
        out = tmp_path / "train"
        main(["train", str(scenario_file), "--out", str(out)])
        return out / "checkpoint.json"

    def test_with_checkpoint(self, scenario_file, tmp_path):
        ckpt = self.checkpoint(scenario_file, tmp_path)
        out = tmp_path / "eval"
        rc = main(["eval", str(scenario_file), "--out", str(out),
                   "--checkpoint", str(ckpt)])
        assert rc == 0
        assert len(read_csv(out / "eval_episodes.csv")) == 16
        assert (out / "heatmap_mug.svg").exists()
        assert (out / "heatmap_keys.svg").exists()

    def test_gt_scores(self, scenario_file, tmp_path):
        out = tmp_path / "eval"
        rc = main(["eval", str(scenario_file), "--out", str(out), "--gt-scores",
                   "--episodes", "8"])
        assert rc == 0
        assert len(read_csv(out / "eval_episodes.csv")) == 9

    def test_tsp_baseline(self, scenario_file, tmp_path):
        out = tmp_path / "eval"
        rc = main(["eval", str(scenario_file), "--out", str(out), "--tsp",
                   "--episodes", "8"])
        assert rc == 0
        # no likelihood model, no heatmaps
        assert not (out / "heatmap_mug.svg").exists()

    def test_exactly_one_source_required(self, scenario_file, tmp_path):
        out = tmp_path / "eval"
        rc = main(["eval", str(scenario_file), "--out", str(out)])
        assert rc == 2
        rc = main(["eval", str(scenario_file), "--out", str(out),
                   "--gt-scores", "--tsp"])
        assert rc == 2

    def test_tsp_ignores_checkpoint(self, scenario_file, tmp_path):
        ckpt = self.checkpoint(scenario_file, tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["eval", str(scenario_file), "--out", str(out_a), "--tsp",
              "--episodes", "8"])
        rc = main(["eval", str(scenario_file), "--out", str(out_b), "--tsp",
                   "--checkpoint", str(ckpt), "--episodes", "8"])
        assert rc == 0
        assert (out_a / "eval_episodes.csv").read_bytes() == \
            (out_b / "eval_episodes.csv").read_bytes()

    def test_parallel_matches_serial(self, scenario_file, tmp_path):
        out_1 = tmp_path / "serial"
        out_2 = tmp_path / "parallel"
        main(["eval", str(scenario_file), "--out", str(out_1), "--gt-scores",
              "--episodes", "10"])
        main(["eval", str(scenario_file), "--out", str(out_2), "--gt-scores",
              "--episodes", "10", "--jobs", "2"])
        assert (out_1 / "eval_episodes.csv").read_bytes() == \
            (out_2 / "eval_episodes.csv").read_bytes()

    def test_byte_identical_reruns(self, scenario_file, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            main(["eval", str(scenario_file), "--out", str(out), "--gt-scores",
                  "--episodes", "12"])
        for name in ("eval_episodes.csv", "eval_summary.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


class TestPlan:
    def test_stdout_listing(self, scenario_file, capsys):
        rc = main(["plan", str(scenario_file), "--object", "mug",
                   "--start", "0,0", "--gt-scores"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("# plan object=mug")
        assert lines[-1].startswith("# objective=")
        waypoints = [ln for ln in lines if not ln.startswith("#")]
        assert len(waypoints) == 5  # one per vantage point

    def test_file_output(self, scenario_file, tmp_path):
        out = tmp_path / "plan.txt"
        rc = main(["plan", str(scenario_file), "--object", "keys",
                   "--start", "3,3", "--gt-scores", "--out", str(out)])
        assert rc == 0
        assert out.read_text().startswith("# plan object=keys")

    def test_unknown_object(self, scenario_file):
        rc = main(["plan", str(scenario_file), "--object", "violin",
                   "--start", "0,0", "--gt-scores"])
        assert rc == 2


class TestBench:
    def test_table(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        rc = main(["bench", "--k-min", "3", "--k-max", "4",
                   "--budget", "5.0", "--out", str(out)])
        assert rc == 0
        rows = read_csv(out)
        assert rows[0] == ["k", "solver", "seconds", "optimal"]
        assert len(rows) == 7  # header + 2 k values x 3 solvers
        printed = capsys.readouterr().out.strip().splitlines()
        assert len(printed) == 6

    def test_bad_range(self):
        rc = main(["bench", "--k-min", "5", "--k-max", "3"])
        assert rc == 2

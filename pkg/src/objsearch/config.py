"""Scenario files: YAML description of map, objects, features, bandit and
episode settings, plus the builder that turns one into runtime objects."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .bandit import BanditHyper, GenLinBandit
from .features import FeatureConfig
from .gridmap import DistanceOracle, load_map
from .sampling import farthest_point_sample
from .simulator import EpisodeConfig, PhiCache, SpawnModel, Simulator


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    map_path: str
    objects: dict  # name -> {furniture id -> probability}
    cell_size: float = 0.1
    vantage_k: int = 25
    vantage_start: tuple = (1, 1)
    peaky: bool = False
    features: dict = field(default_factory=dict)
    bandit: dict = field(default_factory=dict)
    planner: dict = field(default_factory=dict)
    episodes: dict = field(default_factory=dict)
    seed: int = 0
    train_episodes: int = 200
    eval_episodes: int = 300

    def to_dict(self):
        return {
            "map": self.map_path,
            "cell_size": self.cell_size,
            "objects": {n: dict(d) for n, d in self.objects.items()},
            "peaky": self.peaky,
            "vantage": {"k": self.vantage_k, "start": list(self.vantage_start)},
            "features": dict(self.features),
            "bandit": dict(self.bandit),
            "planner": dict(self.planner),
            "episodes": dict(self.episodes),
            "seed": self.seed,
            "train_episodes": self.train_episodes,
            "eval_episodes": self.eval_episodes,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            vantage = data.get("vantage", {})
            return cls(
                map_path=data["map"],
                cell_size=float(data.get("cell_size", 0.1)),
                objects={str(n): {str(f): float(p) for f, p in d.items()}
                         for n, d in data["objects"].items()},
                peaky=bool(data.get("peaky", False)),
                vantage_k=int(vantage.get("k", 25)),
                vantage_start=tuple(vantage.get("start", (1, 1))),
                features=dict(data.get("features", {})),
                bandit=dict(data.get("bandit", {})),
                planner=dict(data.get("planner", {})),
                episodes=dict(data.get("episodes", {})),
                seed=int(data.get("seed", 0)),
                train_episodes=int(data.get("train_episodes", 200)),
                eval_episodes=int(data.get("eval_episodes", 300)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ConfigError(f"malformed scenario: {exc!r}") from exc

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False)

    @classmethod
    def load(cls, path):
        if not os.path.exists(path):
            raise FileNotFoundError(f"scenario file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ConfigError(f"scenario file {path} is not a mapping")
        return cls.from_dict(data)


class Scenario:
    """Runtime bundle built from a ScenarioConfig."""

    def __init__(self, cfg, base_dir="."):
        self.config = cfg
        map_path = cfg.map_path
        if not os.path.isabs(map_path):
            map_path = os.path.join(base_dir, map_path)
        if not os.path.exists(map_path):
            raise FileNotFoundError(f"map file not found: {map_path}")
        self.map = load_map(map_path, cell_size=cfg.cell_size)
        self.object_names = list(cfg.objects)
        self.spawn = SpawnModel(
            probs={i: cfg.objects[name] for i, name in enumerate(self.object_names)},
            peaky=cfg.peaky,
        )
        self.spawn.validate_against(self.map)
        self.feature_config = FeatureConfig(
            n_objects=len(self.object_names), **cfg.features
        )
        self.hyper = BanditHyper(
            k=cfg.vantage_k,
            sigmoid_scale=self.feature_config.sigmoid_scale,
            **{k: v for k, v in cfg.bandit.items() if k != "disjoint"},
        )
        self.disjoint = bool(cfg.bandit.get("disjoint", True))
        self.episode_config = EpisodeConfig(**cfg.episodes)
        self.oracle = DistanceOracle(self.map)
        start = tuple(cfg.vantage_start)
        self.vantage = farthest_point_sample(self.map, start, cfg.vantage_k)
        self.simulator = Simulator(
            self.map, self.oracle, self.vantage, self.spawn, self.episode_config
        )
        self.phi_cache = PhiCache(
            self.map, self.feature_config, self.vantage.points
        )
        self.planner_kind = cfg.planner.get("kind", "exact")
        self.alpha_p = float(cfg.planner.get("alpha_p", 0.5))
        self.time_limit = float(cfg.planner.get("time_limit", 30.0))

    def new_bandit(self):
        return GenLinBandit(
            self.feature_config.dim,
            len(self.object_names),
            self.hyper,
            disjoint=self.disjoint,
        )


def load_scenario(path):
    cfg = ScenarioConfig.load(path)
    return Scenario(cfg, base_dir=os.path.dirname(os.path.abspath(path)))

"""Experiment configuration loaded from YAML; a bare file yields the full default grids."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..bayesnet import BUNDLED_NETWORKS
from ..discovery.cduct import BUDGET_GRID, TAU_GRID
from ..expert.prompts import VERBS, PromptSpec, trait_grid

PRIOR_KINDS = ("UR", "MI", "LLM", "combined")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SearchSection:
    c_p: float = 0.025
    horizon: int = 16
    tau_grid: tuple[float, ...] = TAU_GRID
    budget_grid: tuple[int, ...] = BUDGET_GRID
    fixed_simulations: int | None = None

    def __post_init__(self):
        # YAML 1.1 reads "1e-5" as a string
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))
        object.__setattr__(self, "budget_grid", tuple(int(b) for b in self.budget_grid))
        object.__setattr__(self, "c_p", float(self.c_p))


@dataclass(frozen=True)
class SyntheticSection:
    p_correct: float = 0.9
    edge_confidence: float = 0.7
    no_edge_mass: float = 0.6
    concentration: float = 50.0
    coherent: bool = True
    seed: int = 0


@dataclass(frozen=True)
class ExpertSection:
    # synthetic: offline noisy oracle; mock: the same oracle behind the HTTP client;
    # endpoint: live server from the environment; cache: cached records only
    mode: str = "synthetic"
    model_id: str = "synthetic"
    cache: str | None = None
    max_in_flight: int = 4
    max_retries: int = 3
    timeout: float = 60.0
    synthetic: SyntheticSection = SyntheticSection()


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...] = BUNDLED_NETWORKS
    n: int = 1000
    dataset_seed: int = 0
    resample_per_seed: bool = False
    priors: tuple[str, ...] = PRIOR_KINDS
    # prompt used for priors entering greedy/discovery runs
    prompt: str = "3way"
    # prompt grid evaluated by the metrics suite
    prompt_grid: tuple[str, ...] = field(default_factory=lambda: tuple(trait_grid()))
    verbs: tuple[str, ...] = VERBS
    seeds_per_verb: int = 10
    master_seed: int = 0
    workers: int = 1
    search: SearchSection = SearchSection()
    expert: ExpertSection = ExpertSection()
    out: str = "results"

    def __post_init__(self):
        for ds in self.datasets:
            if ds not in BUNDLED_NETWORKS:
                raise ConfigError(f"unknown dataset {ds!r}; bundled: {', '.join(BUNDLED_NETWORKS)}")
        for kind in self.priors:
            if kind not in PRIOR_KINDS:
                raise ConfigError(f"unknown prior kind {kind!r}")
        for traits in (self.prompt, *self.prompt_grid):
            PromptSpec.from_traits(traits)
        for verb in self.verbs:
            if verb not in VERBS:
                raise ConfigError(f"unknown verb {verb!r}")
        if not self.verbs or self.seeds_per_verb < 1:
            raise ConfigError("need at least one verb and one seed per verb")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if any(t <= 0 for t in self.search.tau_grid):
            raise ConfigError("tau values must be positive")
        if any(b < 1 for b in self.search.budget_grid):
            raise ConfigError("budgets must be >= 1")
        if self.expert.mode not in ("synthetic", "mock", "endpoint", "cache"):
            raise ConfigError(f"unknown expert mode {self.expert.mode!r}")
        if self.expert.mode == "cache" and not self.expert.cache:
            raise ConfigError("expert mode 'cache' needs expert.cache")

    @property
    def runs_per_cell(self) -> int:
        return len(self.verbs) * self.seeds_per_verb

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _build(cls, raw: Any, where: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        default = known[key].default
        if dataclasses.is_dataclass(default):
            kwargs[key] = _build(type(default), value, f"{where}.{key}")
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(raw: dict | None) -> ExperimentConfig:
    return _build(ExperimentConfig, raw or {}, "config")


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    raw = yaml.safe_load(Path(path).read_text())
    return config_from_dict(raw)

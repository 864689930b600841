from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .runner import (
    ExpertSource,
    RunResult,
    RunSpec,
    derive_seed,
    execute_runs,
    paired_trait_test,
    run_discovery_suite,
    run_greedy_suite,
    run_metrics_suite,
)
from .stats import Interval, TTestResult, paired_t_test, t_interval

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExpertSource",
    "Interval",
    "RunResult",
    "RunSpec",
    "TTestResult",
    "config_from_dict",
    "derive_seed",
    "execute_runs",
    "load_config",
    "paired_t_test",
    "paired_trait_test",
    "run_discovery_suite",
    "run_greedy_suite",
    "run_metrics_suite",
    "t_interval",
]

"""Scenario simulation, baseline tracker, evaluation metrics, and the CLI."""

from .baseline import NNBaselineConfig, nn_baseline_track
from .metrics import EvalResult, evaluate
from .pipeline import run_bench, run_pipeline, run_tracker
from .scenario import Scenario, ScenarioSpec, TargetSpec, bench_spec, generate_scenario, preset_spec

__all__ = [
    "NNBaselineConfig",
    "nn_baseline_track",
    "EvalResult",
    "evaluate",
    "run_bench",
    "run_pipeline",
    "run_tracker",
    "Scenario",
    "ScenarioSpec",
    "TargetSpec",
    "bench_spec",
    "generate_scenario",
    "preset_spec",
]

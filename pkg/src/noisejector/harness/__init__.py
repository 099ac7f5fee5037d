"""Run/bench/ablate drivers, protocol conformance, and report IO."""

from __future__ import annotations

from .ablate import ABLATION_CELLS, run_ablation
from .bench import BenchConfig, BenchResult, derive_seed, run_bench, suite_evaluator_id
from .protocol_check import CheckResult, run_protocol_check
from .reports import (
    SCHEMA_VERSION,
    dumps_report,
    load_schema,
    read_noise_vector,
    write_noise_vector,
    write_report,
)
from .run import RunResult, RunSettings, execute_run, run_with_handle

__all__ = [
    "RunSettings",
    "RunResult",
    "execute_run",
    "run_with_handle",
    "BenchConfig",
    "BenchResult",
    "run_bench",
    "derive_seed",
    "suite_evaluator_id",
    "ABLATION_CELLS",
    "run_ablation",
    "CheckResult",
    "run_protocol_check",
    "SCHEMA_VERSION",
    "dumps_report",
    "write_report",
    "write_noise_vector",
    "read_noise_vector",
    "load_schema",
]

"""noisejector: optimize injected noise against a pessimistic quality+realism criterion.

A generator that takes an injected noise vector is treated as a black box
behind an evaluator interface; derivative-free optimizers (diagonal CMA-ES
by default) maximize a baseline-relative criterion that log-damps gains,
takes losses at face value, scores realism by the worst 128x128 patch, and
penalizes the noise norm.
"""

from __future__ import annotations

from .criterion import (
    Baseline,
    CriterionConfig,
    CriterionParts,
    RawEvaluation,
    Variant,
    as_noise_vector,
    criterion,
    criterion_parts,
    l_plus,
    quality_score,
    realism_score,
)
from .evaluator import (
    EvaluatorHandle,
    SyntheticEvaluatorSpec,
    SyntheticKind,
    open_builtin,
    open_evaluator,
    open_external,
)
from .harness import BenchConfig, RunSettings, execute_run, run_bench
from .optimizers import OptimizerKind, OptimizerSpec, make_optimizer

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Baseline",
    "CriterionConfig",
    "CriterionParts",
    "RawEvaluation",
    "Variant",
    "as_noise_vector",
    "criterion",
    "criterion_parts",
    "l_plus",
    "quality_score",
    "realism_score",
    "EvaluatorHandle",
    "SyntheticEvaluatorSpec",
    "SyntheticKind",
    "open_builtin",
    "open_evaluator",
    "open_external",
    "OptimizerKind",
    "OptimizerSpec",
    "make_optimizer",
    "RunSettings",
    "execute_run",
    "BenchConfig",
    "run_bench",
]

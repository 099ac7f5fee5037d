"""Single-optimization driver: ask -> evaluate -> score -> tell, to budget.

The loop owns the criterion composition (evaluators never see weights) and
records one trace row per criterion evaluation, so the trace length always
equals the budget, finite-difference probes included.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..criterion import (
    Baseline,
    CriterionConfig,
    CriterionParts,
    RawEvaluation,
    compose_criterion_gradient,
    criterion_parts,
    penalty_gradient,
)
from ..evaluator import EvaluatorHandle, open_evaluator
from ..optimizers import (
    BudgetExhaustedError,
    OptimizerKind,
    OptimizerSpec,
    make_optimizer,
)
from .reports import SCHEMA_VERSION

__all__ = ["RunSettings", "RunResult", "execute_run", "run_with_handle"]


@dataclass(frozen=True)
class RunSettings:
    """Everything one optimization run needs, in memory."""

    evaluator: str
    optimizer: OptimizerKind = OptimizerKind.DCMA
    criterion: CriterionConfig = field(default_factory=CriterionConfig)
    budget: int = 10_000
    seed: int = 0
    hyperparams: Mapping[str, float] = field(default_factory=dict)
    handshake_timeout: float = 60.0
    eval_timeout: float = 600.0
    stderr_path: str | None = None
    include_wall_time: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "optimizer", OptimizerKind(self.optimizer))
        object.__setattr__(self, "hyperparams", dict(self.hyperparams))


@dataclass
class RunResult:
    report: dict
    recommended: np.ndarray


def _gradient_fn(
    handle: EvaluatorHandle, base: Baseline, cfg: CriterionConfig
) -> Callable[[np.ndarray, RawEvaluation], np.ndarray] | None:
    """Criterion-gradient source from the evaluator, when one is usable.

    In-process evaluators exposing the analytic (quality, min-patch realism)
    gradient pair compose exactly through the chain rule.  The wire protocol
    carries a single combined vector d(quality + min-patch)/dz, which matches
    the criterion gradient only for raw scores with equal quality/realism
    weights; anything else falls back to finite differences.
    """
    if not handle.capabilities.supports_gradient:
        return None
    if hasattr(handle, "score_gradients"):

        def exact(z: np.ndarray, evaluation: RawEvaluation) -> np.ndarray:
            gq, gr = handle.score_gradients(z)
            return compose_criterion_gradient(z, evaluation, base, cfg, gq, gr)

        return exact
    if (
        hasattr(handle, "combined_score_gradient")
        and not cfg.pessimistic
        and cfg.lambda_q == cfg.lambda_r
    ):

        def combined(z: np.ndarray, evaluation: RawEvaluation) -> np.ndarray:
            g = handle.combined_score_gradient(z)
            return cfg.lambda_q * g - penalty_gradient(z, base, cfg)

        return combined
    return None


def run_with_handle(settings: RunSettings, handle: EvaluatorHandle) -> RunResult:
    """Drive one optimization against an already-open evaluator handle."""
    cfg = settings.criterion
    base = handle.baseline
    grad_fn = None
    hyperparams = dict(settings.hyperparams)
    if settings.optimizer in (OptimizerKind.GD, OptimizerKind.ADAM):
        grad_fn = _gradient_fn(handle, base, cfg)
        if grad_fn is not None:
            hyperparams.setdefault("external_gradient", 1.0)
    spec = OptimizerSpec(
        kind=settings.optimizer,
        dimension=handle.dimension,
        budget=settings.budget,
        seed=settings.seed,
        hyperparams=hyperparams,
    )
    optimizer = make_optimizer(spec)

    trace: list[list[float]] = []
    best_value = -float("inf")
    best_parts: CriterionParts | None = None
    best_eval: RawEvaluation | None = None
    best_index = 0

    started = time.perf_counter()
    while True:
        try:
            batch = optimizer.ask()
        except BudgetExhaustedError:
            break
        evaluations = handle.evaluate_batch(batch)
        pairs = []
        for z, evaluation in zip(batch, evaluations):
            parts = criterion_parts(z, evaluation, base, cfg)
            index = len(trace) + 1
            if parts.value > best_value:
                best_value = parts.value
                best_parts = parts
                best_eval = evaluation
                best_index = index
            trace.append([index, parts.value, best_value])
            pairs.append((z, parts.value))
        if grad_fn is not None:
            gradients = [grad_fn(z, ev) for z, ev in zip(batch, evaluations)]
            optimizer.tell(pairs, gradients=gradients)
        else:
            optimizer.tell(pairs)
    wall_time = time.perf_counter() - started

    recommended = optimizer.recommend()
    assert best_parts is not None and best_eval is not None
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "run",
        "optimizer": {
            "kind": settings.optimizer.value,
            "seed": settings.seed,
            "budget": settings.budget,
            "hyperparams": {k: float(v) for k, v in sorted(hyperparams.items())},
        },
        "criterion": {
            "variant": cfg.variant.value,
            "pessimistic": cfg.pessimistic,
            "lambda_q": cfg.lambda_q,
            "lambda_r": cfg.lambda_r,
            "lambda_p": cfg.lambda_p,
        },
        "evaluator": {
            "id": handle.evaluator_id,
            "dimension": handle.dimension,
            "patch_count": handle.patch_count,
            "baseline": {
                "quality0": base.quality0,
                "realism0": base.realism0,
                "blur": base.blur,
            },
        },
        "trace": trace,
        "final": {
            "criterion": best_value,
            "s_q": best_parts.s_q,
            "s_r": best_parts.s_r,
            "penalty": best_parts.penalty,
            "min_patch": best_eval.min_patch,
            "eval_index": best_index,
            "z_file": None,
        },
        "wall_time_s": wall_time if settings.include_wall_time else None,
        "stderr_log": None,
    }
    return RunResult(report=report, recommended=recommended)


def execute_run(settings: RunSettings) -> RunResult:
    """Open the evaluator named in the settings, run, and close it."""
    external = settings.evaluator.startswith("exec:")
    options = (
        dict(
            stderr_path=settings.stderr_path,
            handshake_timeout=settings.handshake_timeout,
            eval_timeout=settings.eval_timeout,
        )
        if external
        else {}
    )
    handle = open_evaluator(settings.evaluator, **options)
    try:
        result = run_with_handle(settings, handle)
        if external and settings.stderr_path:
            result.report["stderr_log"] = str(settings.stderr_path)
        return result
    finally:
        handle.close()

"""Ablation grid: weight zeroing x pessimistic/raw scoring.

Runs {full, no_realism_no_penalty, no_realism, no_penalty, no_quality} x
{pessimistic, raw} with a shared optimizer/evaluator/seed/budget, and
summarizes the final quality score, realism score, and ||z||^2/d per cell.
The full pessimistic cell is exactly a plain run with default weights.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..criterion import CriterionConfig
from .reports import SCHEMA_VERSION
from .run import RunResult, RunSettings, execute_run

__all__ = ["ABLATION_CELLS", "AblationCellResult", "run_ablation"]

# (label, lambda_q, lambda_r, lambda_p)
ABLATION_CELLS: tuple[tuple[str, float, float, float], ...] = (
    ("full", 1.0, 1.0, 1.0),
    ("no_realism_no_penalty", 1.0, 0.0, 0.0),
    ("no_realism", 1.0, 0.0, 1.0),
    ("no_penalty", 1.0, 1.0, 0.0),
    ("no_quality", 0.0, 1.0, 1.0),
)


@dataclass
class AblationCellResult:
    label: str
    pessimistic: bool
    run: RunResult
    summary: dict


def run_ablation(base_settings: RunSettings) -> tuple[dict, list[AblationCellResult]]:
    """Run the grid; returns (summary payload, per-cell results)."""
    cells: list[AblationCellResult] = []
    for label, lambda_q, lambda_r, lambda_p in ABLATION_CELLS:
        for pessimistic in (True, False):
            cfg = CriterionConfig(
                lambda_q=lambda_q,
                lambda_r=lambda_r,
                lambda_p=lambda_p,
                variant=base_settings.criterion.variant,
                pessimistic=pessimistic,
            )
            settings = replace(base_settings, criterion=cfg)
            result = execute_run(settings)
            z = result.recommended
            final = result.report["final"]
            summary = {
                "cell": label,
                "pessimistic": pessimistic,
                "lambda_q": lambda_q,
                "lambda_r": lambda_r,
                "lambda_p": lambda_p,
                "criterion": final["criterion"],
                "s_q": final["s_q"],
                "s_r": final["s_r"],
                "penalty": final["penalty"],
                "min_patch": final["min_patch"],
                "norm2_over_d": float(np.dot(z, z)) / z.size,
            }
            cells.append(
                AblationCellResult(label=label, pessimistic=pessimistic, run=result, summary=summary)
            )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "ablate",
        "evaluator": base_settings.evaluator,
        "optimizer": base_settings.optimizer.value,
        "budget": base_settings.budget,
        "seed": base_settings.seed,
        "variant": base_settings.criterion.variant.value,
        "cells": [cell.summary for cell in cells],
    }
    return payload, cells

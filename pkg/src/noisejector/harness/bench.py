"""Multi-optimizer benchmark matrix: optimizers x criteria x repetitions.

Each repetition draws a fresh synthetic problem instance (one evaluator seed
shared by every cell of that repetition, like scoring the same image with
every optimizer), and each cell gets its own optimizer seed derived from
(master seed, row, column, repetition) so adding a row never reshuffles
existing cells' randomness.  Cell failures are recorded and the matrix
continues.  All persisted artifacts are byte-identical across repeated runs
with the same master seed; wall-clock timing goes to the log only.
"""

from __future__ import annotations

import hashlib
import io
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..criterion import CriterionConfig, Variant
from ..evaluator import SyntheticEvaluatorSpec, SyntheticKind
from ..optimizers import OptimizerKind
from .reports import SCHEMA_VERSION
from .run import RunSettings, execute_run

__all__ = ["BenchConfig", "BenchResult", "derive_seed", "suite_evaluator_id", "run_bench", "SUITE_NAMES"]

logger = logging.getLogger(__name__)

SUITE_NAMES = ("separable", "rotated", "plateau")

_SUITE_DIMENSIONS = {"separable": 50, "rotated": 10, "plateau": 2}

# Suite problem shapes: the separable suite is an ellipsoid (two-decade
# curvature ramp) with mildly curved patch quadratics whose minimum creases
# the landscape near the optimum; rotated is a non-separable sanity suite;
# plateau is the artifact-pathology suite.
_SUITE_PARAMETERS = {
    "separable": {
        "curv_min": 0.005,
        "curv_max": 50.0,
        "z_star_scale": 0.3,
        "z_star_min": 0.02,
        "z_star_max": 2.0,
        "patch_curv": 1.0,
        "patch_spread": 0.2,
        "ripple_amp": 0.1,
        "ripple_wavelength": 0.08,
        "blur": 0.8,
    },
    "rotated": {"cond": 10.0, "blur": 1.2},
    "plateau": {"blur": 1.0},
}

_SUITE_KINDS = {
    "separable": SyntheticKind.SEPARABLE_QUADRATIC,
    "rotated": SyntheticKind.ROTATED_QUADRATIC,
    "plateau": SyntheticKind.PLATEAU_ARTIFACT,
}


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit seed from a master seed and cell coordinates."""
    text = "\x1f".join(["noisejector", str(master_seed), *map(str, parts)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def suite_evaluator_id(suite: str, rep_seed: int, dimension: int | None = None) -> str:
    if suite not in SUITE_NAMES:
        raise ValueError(f"unknown suite {suite!r}, expected one of {SUITE_NAMES}")
    spec = SyntheticEvaluatorSpec(
        kind=_SUITE_KINDS[suite],
        dimension=dimension or _SUITE_DIMENSIONS[suite],
        seed=rep_seed,
        parameters=_SUITE_PARAMETERS[suite],
    )
    return spec.identifier()


@dataclass(frozen=True)
class BenchConfig:
    suite: str
    optimizers: tuple[OptimizerKind, ...] = tuple(OptimizerKind)
    criteria: tuple[Variant, ...] = (Variant.C1, Variant.C2)
    reps: int = 5
    master_seed: int = 0
    budget: int = 10_000
    dimension: int | None = None
    jobs: int = 0  # 0 -> all available cores
    pessimistic: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "optimizers", tuple(OptimizerKind(k) for k in self.optimizers))
        object.__setattr__(self, "criteria", tuple(Variant(v) for v in self.criteria))
        if self.suite not in SUITE_NAMES:
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.optimizers or not self.criteria:
            raise ValueError("need at least one optimizer and one criterion")


@dataclass
class BenchResult:
    payload: dict
    csv_text: str
    table_text: str
    any_failed: bool


def _run_cell(job: dict) -> dict:
    try:
        settings = RunSettings(
            evaluator=job["evaluator"],
            optimizer=OptimizerKind(job["optimizer"]),
            criterion=CriterionConfig(
                variant=Variant(job["variant"]), pessimistic=job["pessimistic"]
            ),
            budget=job["budget"],
            seed=job["seed"],
            include_wall_time=False,
        )
        result = execute_run(settings)
        return {"value": result.report["final"]["criterion"], "error": None}
    except Exception as exc:  # cell failures are recorded, the matrix continues
        return {"value": None, "error": f"{type(exc).__name__}: {exc}"}


def run_bench(config: BenchConfig) -> BenchResult:
    rep_seeds = [derive_seed(config.master_seed, "evaluator", config.suite, rep)
                 for rep in range(config.reps)]
    evaluators = [suite_evaluator_id(config.suite, seed, config.dimension) for seed in rep_seeds]

    jobs: list[dict] = []
    for kind in config.optimizers:
        for variant in config.criteria:
            for rep in range(config.reps):
                jobs.append(
                    {
                        "evaluator": evaluators[rep],
                        "optimizer": kind.value,
                        "variant": variant.value,
                        "pessimistic": config.pessimistic,
                        "budget": config.budget,
                        "seed": derive_seed(
                            config.master_seed, kind.value, variant.value, rep
                        ),
                    }
                )

    workers = config.jobs if config.jobs > 0 else (os.cpu_count() or 1)
    started = time.perf_counter()
    if workers <= 1 or len(jobs) == 1:
        outcomes = [_run_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            outcomes = list(pool.map(_run_cell, jobs))
    logger.info("bench: %d runs finished in %.1fs", len(jobs), time.perf_counter() - started)

    cells = []
    any_failed = False
    cursor = 0
    for kind in config.optimizers:
        for variant in config.criteria:
            chunk = outcomes[cursor : cursor + config.reps]
            cell_jobs = jobs[cursor : cursor + config.reps]
            cursor += config.reps
            values = [out["value"] for out in chunk]
            errors = [out["error"] for out in chunk]
            ok = [v for v in values if v is not None]
            failed = len(ok) < config.reps
            any_failed = any_failed or failed
            cells.append(
                {
                    "optimizer": kind.value,
                    "criterion": variant.value,
                    "seeds": [job["seed"] for job in cell_jobs],
                    "values": values,
                    "errors": errors,
                    # population std: well-defined (0) for a single repetition
                    "mean": float(np.mean(ok)) if ok else None,
                    "std": float(np.std(ok)) if ok else None,
                    "failed": failed,
                }
            )

    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "bench",
        "suite": config.suite,
        "budget": config.budget,
        "dimension": config.dimension or _SUITE_DIMENSIONS[config.suite],
        "reps": config.reps,
        "master_seed": config.master_seed,
        "pessimistic": config.pessimistic,
        "optimizers": [k.value for k in config.optimizers],
        "criteria": [v.value for v in config.criteria],
        "evaluators": evaluators,
        "cells": cells,
    }
    return BenchResult(
        payload=payload,
        csv_text=_format_csv(config, cells),
        table_text=_format_table(config, cells),
        any_failed=any_failed,
    )


def _cell_text(cell: dict) -> str:
    if cell["mean"] is None:
        return "failed"
    text = f"{cell['mean']:.6g} ± {cell['std']:.3g}"
    if cell["failed"]:
        text += " (partial)"
    return text


def _format_table(config: BenchConfig, cells: list[dict]) -> str:
    by_key = {(c["optimizer"], c["criterion"]): c for c in cells}
    headers = ["optimizer"] + [v.value for v in config.criteria]
    rows = []
    for kind in config.optimizers:
        row = [kind.value]
        for variant in config.criteria:
            row.append(_cell_text(by_key[(kind.value, variant.value)]))
        rows.append(row)
    widths = [max(len(str(r[i])) for r in [headers] + rows) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(c).ljust(widths[i]) for i, c in enumerate(row)))
    return "\n".join(lines) + "\n"


def _format_csv(config: BenchConfig, cells: list[dict]) -> str:
    import csv

    by_key = {(c["optimizer"], c["criterion"]): c for c in cells}
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = ["optimizer"]
    for variant in config.criteria:
        header += [f"{variant.value}_mean", f"{variant.value}_std"]
    writer.writerow(header)
    for kind in config.optimizers:
        row: list = [kind.value]
        for variant in config.criteria:
            cell = by_key[(kind.value, variant.value)]
            row += [
                "" if cell["mean"] is None else repr(cell["mean"]),
                "" if cell["std"] is None else repr(cell["std"]),
            ]
        writer.writerow(row)
    return buffer.getvalue()

"""Evaluator handle contract: the boundary between search and model world.

A handle fixes the noise dimension and the zero-noise baseline for its
lifetime and maps candidate vectors to raw (quality, per-patch realism)
scores.  Criterion math never lives here.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..criterion import Baseline, RawEvaluation

__all__ = ["Capabilities", "EvaluatorHandle"]


@dataclass(frozen=True)
class Capabilities:
    supports_gradient: bool = False
    supports_batch: bool = False
    #: how many evaluate calls may be in flight concurrently; 0 = unbounded
    max_inflight: int = 1


class EvaluatorHandle(ABC):
    """Abstract evaluator: z -> (raw quality, per-patch realism scores)."""

    evaluator_id: str
    dimension: int
    patch_count: int
    baseline: Baseline
    capabilities: Capabilities

    @abstractmethod
    def evaluate(self, z: np.ndarray) -> RawEvaluation:
        """Score one candidate.  Must satisfy evaluate(0) == baseline."""

    def evaluate_batch(self, batch: Sequence[np.ndarray]) -> list[RawEvaluation]:
        """Score a batch; default is serial, subclasses may pipeline."""
        return [self.evaluate(z) for z in batch]

    def close(self) -> None:
        """Release resources; idempotent."""

    def __enter__(self) -> "EvaluatorHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

"""Ask/tell optimizer core: spec, budget accounting, best-so-far tracking.

All optimizers maximize.  The driving loop is::

    opt = make_optimizer(spec)
    while True:
        try:
            batch = opt.ask()
        except BudgetExhaustedError:
            break
        opt.tell([(z, fitness(z)) for z in batch])
    best = opt.recommend()

``ask`` returns at most the optimizer's natural batch but never more than
the remaining budget, so a run consumes exactly ``spec.budget`` evaluations.
``tell`` accepts the batch in any order (candidates are matched back to the
ask batch), so one batch may be evaluated by concurrent workers.  A state is
a single-owner machine: ask/tell/recommend calls must be serialized.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "OptimizerKind",
    "OptimizerSpec",
    "Optimizer",
    "OptimizerError",
    "BudgetExhaustedError",
    "UnknownCandidateError",
    "NanFitnessError",
]

# State-variable clamp shared by the evolution strategies: step sizes and
# variance entries stay inside this range, clamps are counted and logged.
STATE_CLAMP_LOW = 1e-20
STATE_CLAMP_HIGH = 1e20


class OptimizerError(RuntimeError):
    pass


class BudgetExhaustedError(OptimizerError):
    """ask() called with no evaluations left in the budget."""


class UnknownCandidateError(OptimizerError):
    """tell() received a candidate that the matching ask() did not produce."""


class NanFitnessError(OptimizerError):
    """tell() received a NaN fitness; NaN never enters optimizer state."""


class OptimizerKind(str, Enum):
    DCMA = "dcma"
    CMA = "cma"
    ONE_PLUS_ONE = "oneplusone"
    DE = "de"
    RANDOM_SEARCH = "random"
    GD = "gd"
    ADAM = "adam"


@dataclass(frozen=True)
class OptimizerSpec:
    """Immutable run configuration for one optimizer instance.

    ``budget`` is the total number of criterion evaluations the optimizer
    may consume, including gradient probes.  ``hyperparams`` overrides
    per-kind defaults (see each optimizer class).
    """

    kind: OptimizerKind
    dimension: int
    budget: int = 10_000
    seed: int = 0
    hyperparams: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OptimizerKind(self.kind))
        object.__setattr__(self, "hyperparams", dict(self.hyperparams))
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


class Optimizer(ABC):
    """Base ask/tell state machine (maximization)."""

    #: set by gradient-based optimizers running on evaluator-supplied gradients
    accepts_gradients = False

    def __init__(self, spec: OptimizerSpec) -> None:
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.evaluations_used = 0
        self.generation = 0
        self._pending: list[np.ndarray] | None = None
        self._pending_full = True
        self._best_value = -math.inf
        self._best_candidate: np.ndarray | None = None
        self._best_index: int | None = None
        if spec.budget < self.population_size:
            raise ValueError(
                f"budget {spec.budget} is below the population size "
                f"{self.population_size} of {spec.kind.value}"
            )

    # -- subclass surface ---------------------------------------------------

    @property
    @abstractmethod
    def population_size(self) -> int:
        """Natural batch size of one ask (may exceed the final, truncated ask)."""

    @abstractmethod
    def _propose(self, count: int) -> list[np.ndarray]:
        """Produce `count` candidates (count <= population_size)."""

    @abstractmethod
    def _update(
        self,
        candidates: list[np.ndarray],
        fitness: np.ndarray,
        partial: bool,
        gradients: list[np.ndarray] | None,
    ) -> None:
        """Consume one told batch, in ask order.  ``partial`` marks a
        budget-truncated batch (smaller than the natural population)."""

    # -- public protocol ----------------------------------------------------

    @property
    def evaluations_remaining(self) -> int:
        return self.spec.budget - self.evaluations_used

    @property
    def best_value(self) -> float:
        return self._best_value

    def ask(self) -> list[np.ndarray]:
        if self._pending is not None:
            raise OptimizerError("ask() called before tell() of the previous batch")
        remaining = self.evaluations_remaining
        if remaining <= 0:
            raise BudgetExhaustedError(f"budget of {self.spec.budget} evaluations exhausted")
        count = min(self.population_size, remaining)
        batch = self._propose(count)
        if len(batch) != count:
            raise OptimizerError(f"internal error: proposed {len(batch)} != {count}")
        self._pending = [np.ascontiguousarray(z, dtype=np.float64) for z in batch]
        self._pending_full = count == self.population_size
        return [z.copy() for z in self._pending]

    def tell(
        self,
        pairs: Sequence[tuple[np.ndarray, float]],
        gradients: Sequence[np.ndarray] | None = None,
    ) -> None:
        if self._pending is None:
            raise OptimizerError("tell() called without a pending ask()")
        pending = self._pending
        if len(pairs) != len(pending):
            raise UnknownCandidateError(
                f"tell() got {len(pairs)} pairs for a batch of {len(pending)}"
            )
        if gradients is not None and not self.accepts_gradients:
            raise OptimizerError(f"{self.spec.kind.value} does not accept gradients")
        if gradients is not None and len(gradients) != len(pairs):
            raise OptimizerError("gradients must align one-to-one with pairs")

        index_of: dict[bytes, list[int]] = {}
        for i, z in enumerate(pending):
            index_of.setdefault(z.tobytes(), []).append(i)
        fitness = np.full(len(pending), np.nan)
        grads: list[np.ndarray] | None = [None] * len(pending) if gradients is not None else None
        for k, (z, value) in enumerate(pairs):
            value = float(value)
            if math.isnan(value):
                raise NanFitnessError("NaN fitness rejected")
            key = np.ascontiguousarray(z, dtype=np.float64).tobytes()
            bucket = index_of.get(key)
            if not bucket:
                raise UnknownCandidateError("candidate was not produced by the matching ask()")
            i = bucket.pop(0)
            fitness[i] = value
            if grads is not None:
                grads[i] = np.asarray(gradients[k], dtype=np.float64)

        # Best-so-far in evaluation order; strict improvement keeps the
        # earliest candidate on ties.
        start = self.evaluations_used
        for i, value in enumerate(fitness):
            if value > self._best_value:
                self._best_value = float(value)
                self._best_candidate = pending[i].copy()
                self._best_index = start + i
        self.evaluations_used += len(pending)
        partial = not self._pending_full
        self._pending = None
        self._update(pending, fitness, partial, grads)
        self.generation += 1

    def recommend(self) -> np.ndarray:
        """Best evaluated candidate so far (ties broken by earliest evaluation)."""
        if self._best_candidate is None:
            raise OptimizerError("recommend() called before any tell()")
        return self._best_candidate.copy()


def ranked_order(fitness: np.ndarray) -> np.ndarray:
    """Indices sorted by fitness descending, ties by ask index ascending."""
    return np.lexsort((np.arange(fitness.size), -fitness))

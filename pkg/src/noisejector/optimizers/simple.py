"""Random search and the (1+1) evolution strategy."""

from __future__ import annotations

import math

import numpy as np

from .base import STATE_CLAMP_HIGH, STATE_CLAMP_LOW, Optimizer, OptimizerSpec

__all__ = ["RandomSearch", "OnePlusOneEs"]


class RandomSearch(Optimizer):
    """Candidates are i.i.d. standard normal draws; no adaptation."""

    @property
    def population_size(self) -> int:
        return 1

    def _propose(self, count: int) -> list[np.ndarray]:
        return [self.rng.standard_normal(self.spec.dimension)]

    def _update(self, candidates, fitness, partial, gradients) -> None:
        pass


class OnePlusOneEs(Optimizer):
    """(1+1)-ES with the one-fifth success rule.

    The first ask evaluates the zero-vector incumbent itself; afterwards each
    ask is one Gaussian mutation of the incumbent.  On success (offspring at
    least as fit) the step size grows by exp(1/3), otherwise it shrinks by
    exp(-1/12); at a 1/5 success rate the two balance exactly.
    """

    def __init__(self, spec: OptimizerSpec) -> None:
        super().__init__(spec)
        self.sigma = float(self.spec.hyperparams.get("sigma0", 0.5))
        if self.sigma <= 0:
            raise ValueError(f"sigma0 must be > 0, got {self.sigma}")
        self.incumbent = np.zeros(spec.dimension)
        self.incumbent_fitness: float | None = None

    @property
    def population_size(self) -> int:
        return 1

    def _propose(self, count: int) -> list[np.ndarray]:
        if self.incumbent_fitness is None:
            return [self.incumbent.copy()]
        return [self.incumbent + self.sigma * self.rng.standard_normal(self.spec.dimension)]

    def _update(self, candidates, fitness, partial, gradients) -> None:
        value = float(fitness[0])
        if self.incumbent_fitness is None:
            self.incumbent_fitness = value
            return
        if value >= self.incumbent_fitness:
            self.incumbent = candidates[0].copy()
            self.incumbent_fitness = value
            self.sigma *= math.exp(1.0 / 3.0)
        else:
            self.sigma *= math.exp(-1.0 / 12.0)
        self.sigma = min(max(self.sigma, STATE_CLAMP_LOW), STATE_CLAMP_HIGH)

"""Differential evolution, rand/1/bin with greedy selection."""

from __future__ import annotations

import numpy as np

from .base import Optimizer, OptimizerSpec

__all__ = ["DifferentialEvolution"]


class DifferentialEvolution(Optimizer):
    """rand/1/bin DE: mutant = x_r1 + F (x_r2 - x_r3), binomial crossover.

    Defaults: population 30, F = 0.8, CR = 0.9.  The first ask evaluates the
    initial population (one individual at zero, the rest Gaussian around it);
    each later ask proposes one trial per parent and tell applies per-pair
    greedy selection (ties accepted).
    """

    def __init__(self, spec: OptimizerSpec) -> None:
        h = dict(spec.hyperparams)
        self._popsize = int(h.get("popsize", 30))
        if self._popsize < 4:
            raise ValueError(f"DE population must be >= 4, got {self._popsize}")
        super().__init__(spec)
        self.f_weight = float(h.get("f", 0.8))
        self.crossover = float(h.get("cr", 0.9))
        if not 0.0 < self.crossover <= 1.0:
            raise ValueError(f"cr must be in (0, 1], got {self.crossover}")
        sigma0 = float(h.get("sigma0", 0.5))
        self.population = np.zeros((self._popsize, spec.dimension))
        self.population[1:] = sigma0 * self.rng.standard_normal(
            (self._popsize - 1, spec.dimension)
        )
        self.fitness: np.ndarray | None = None
        self._trial_parents: list[int] = []

    @property
    def population_size(self) -> int:
        return self._popsize

    def _propose(self, count: int) -> list[np.ndarray]:
        if self.fitness is None:
            # Initial generation: evaluate the population itself.  Budget is
            # validated >= popsize, so the first ask is never truncated.
            self._trial_parents = list(range(count))
            return [self.population[i].copy() for i in range(count)]
        d = self.spec.dimension
        trials: list[np.ndarray] = []
        self._trial_parents = []
        for i in range(count):
            others = np.delete(np.arange(self._popsize), i)
            r1, r2, r3 = self.rng.choice(others, size=3, replace=False)
            mutant = self.population[r1] + self.f_weight * (
                self.population[r2] - self.population[r3]
            )
            keep = self.rng.random(d) < self.crossover
            keep[self.rng.integers(d)] = True  # at least one gene from the mutant
            trials.append(np.where(keep, mutant, self.population[i]))
            self._trial_parents.append(i)
        return trials

    def _update(self, candidates, fitness, partial, gradients) -> None:
        if self.fitness is None:
            self.fitness = np.asarray(fitness, dtype=float).copy()
            return
        for trial, value, parent in zip(candidates, fitness, self._trial_parents):
            if value >= self.fitness[parent]:
                self.population[parent] = trial
                self.fitness[parent] = value

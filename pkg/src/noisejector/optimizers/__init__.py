"""Derivative-free and first-order optimizers behind one ask/tell interface."""

from __future__ import annotations

from .base import (
    BudgetExhaustedError,
    NanFitnessError,
    Optimizer,
    OptimizerError,
    OptimizerKind,
    OptimizerSpec,
    UnknownCandidateError,
)
from .cma import CmaEs, DiagonalCmaEs
from .de import DifferentialEvolution
from .gradient import Adam, GradientAscent, finite_difference_gradient
from .simple import OnePlusOneEs, RandomSearch

__all__ = [
    "OptimizerKind",
    "OptimizerSpec",
    "Optimizer",
    "OptimizerError",
    "BudgetExhaustedError",
    "UnknownCandidateError",
    "NanFitnessError",
    "CmaEs",
    "DiagonalCmaEs",
    "OnePlusOneEs",
    "RandomSearch",
    "DifferentialEvolution",
    "GradientAscent",
    "Adam",
    "finite_difference_gradient",
    "make_optimizer",
]

_REGISTRY: dict[OptimizerKind, type[Optimizer]] = {
    OptimizerKind.DCMA: DiagonalCmaEs,
    OptimizerKind.CMA: CmaEs,
    OptimizerKind.ONE_PLUS_ONE: OnePlusOneEs,
    OptimizerKind.DE: DifferentialEvolution,
    OptimizerKind.RANDOM_SEARCH: RandomSearch,
    OptimizerKind.GD: GradientAscent,
    OptimizerKind.ADAM: Adam,
}


def make_optimizer(spec: OptimizerSpec) -> Optimizer:
    """Instantiate the optimizer named by ``spec.kind``."""
    return _REGISTRY[OptimizerKind(spec.kind)](spec)

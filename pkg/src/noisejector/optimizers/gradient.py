"""First-order baselines: gradient ascent and Adam.

Behind a black-box evaluator these run on forward finite differences: each
ask returns the current iterate plus its d probe points, so one step costs
d + 1 criterion evaluations and budget accounting stays exact.  When the
harness can supply criterion gradients directly (hyperparam
``external_gradient=1``), each ask is the bare iterate and the gradient
arrives through ``tell(..., gradients=[g])``.
"""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np

from .base import Optimizer, OptimizerSpec

__all__ = ["GradientAscent", "Adam", "finite_difference_gradient"]

logger = logging.getLogger(__name__)


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], z: np.ndarray, eps: float
) -> np.ndarray:
    """Forward-difference gradient estimate, g_i = (f(z + eps e_i) - f(z)) / eps.

    Charges d + 1 evaluations of ``f``.  Raises on non-finite values so a
    broken objective is caught at the probe, not inside optimizer state.
    """
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    z = np.asarray(z, dtype=np.float64)
    f0 = float(f(z))
    if not np.isfinite(f0):
        raise ValueError(f"objective returned non-finite value {f0!r} at the base point")
    g = np.empty(z.size)
    for i in range(z.size):
        probe = z.copy()
        probe[i] += eps
        fi = float(f(probe))
        if not np.isfinite(fi):
            raise ValueError(f"objective returned non-finite value {fi!r} at probe {i}")
        g[i] = (fi - f0) / eps
    return g


class _FirstOrder(Optimizer):
    def __init__(self, spec: OptimizerSpec) -> None:
        h = dict(spec.hyperparams)
        self.external_gradient = bool(h.get("external_gradient", 0.0))
        self.accepts_gradients = self.external_gradient
        super().__init__(spec)
        self.lr = float(h.get("lr", 0.1))
        self.eps = float(h.get("eps", 1e-3))
        if self.lr <= 0 or self.eps <= 0:
            raise ValueError("lr and eps must be > 0")
        self.iterate = np.zeros(spec.dimension)

    @property
    def population_size(self) -> int:
        return 1 if self.external_gradient else self.spec.dimension + 1

    def _propose(self, count: int) -> list[np.ndarray]:
        if self.external_gradient:
            return [self.iterate.copy()]
        # Probe set: iterate first, then one forward probe per coordinate.
        # A truncated count still evaluates (and best-tracks) a prefix.
        batch = np.repeat(self.iterate[None, :], count, axis=0)
        for i in range(1, count):
            batch[i, i - 1] += self.eps
        return list(batch)

    def _update(self, candidates, fitness, partial, gradients) -> None:
        if self.external_gradient:
            if gradients is None or gradients[0] is None:
                raise ValueError("external-gradient mode requires tell(..., gradients=[g])")
            g = np.asarray(gradients[0], dtype=np.float64)
        else:
            if partial:
                return  # not enough probes left in the budget for a step
            g = (fitness[1:] - fitness[0]) / self.eps
        if not np.all(np.isfinite(g)):
            logger.debug("%s: skipping step on non-finite gradient", self.spec.kind.value)
            return
        step = self._step(g)
        new_iterate = self.iterate + step
        if not np.all(np.isfinite(new_iterate)):
            logger.debug("%s: skipping step on non-finite iterate", self.spec.kind.value)
            return
        self.iterate = new_iterate

    def _step(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class GradientAscent(_FirstOrder):
    """Fixed-step gradient ascent."""

    def _step(self, g: np.ndarray) -> np.ndarray:
        return self.lr * g


class Adam(_FirstOrder):
    """Adam (ascent direction), beta1 = 0.9, beta2 = 0.999."""

    def __init__(self, spec: OptimizerSpec) -> None:
        super().__init__(spec)
        h = dict(spec.hyperparams)
        self.beta1 = float(h.get("beta1", 0.9))
        self.beta2 = float(h.get("beta2", 0.999))
        self.adam_eps = float(h.get("adam_eps", 1e-8))
        self._m = np.zeros(spec.dimension)
        self._v = np.zeros(spec.dimension)
        self._t = 0

    def _step(self, g: np.ndarray) -> np.ndarray:
        self._t += 1
        self._m = self.beta1 * self._m + (1.0 - self.beta1) * g
        self._v = self.beta2 * self._v + (1.0 - self.beta2) * g**2
        m_hat = self._m / (1.0 - self.beta1**self._t)
        v_hat = self._v / (1.0 - self.beta2**self._t)
        return self.lr * m_hat / (np.sqrt(v_hat) + self.adam_eps)

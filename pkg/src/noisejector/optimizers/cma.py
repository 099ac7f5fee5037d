"""Covariance matrix adaptation evolution strategies: full and diagonal.

Both use the standard defaults: population 4 + floor(3 ln d), log-rank
recombination weights, cumulative step-size adaptation, rank-1 plus rank-mu
covariance updates.  The diagonal variant constrains the covariance to a
per-coordinate variance vector, which drops the update cost from quadratic
to linear and (with an extra (d+2)/3 learning-rate factor) adapts axis
scales much faster in high dimension.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .base import (
    STATE_CLAMP_HIGH,
    STATE_CLAMP_LOW,
    Optimizer,
    OptimizerSpec,
    ranked_order,
)

__all__ = ["CmaEs", "DiagonalCmaEs"]

logger = logging.getLogger(__name__)


class _CmaCore(Optimizer):
    """Shared machinery; `diagonal` picks the covariance model."""

    diagonal = False

    def __init__(self, spec: OptimizerSpec) -> None:
        d = spec.dimension
        h = dict(spec.hyperparams)
        lam = int(h.get("popsize", 4 + int(3 * math.log(d))))
        if lam < 2:
            raise ValueError(f"population size must be >= 2, got {lam}")
        self._lam = lam
        mu = lam // 2
        raw = math.log((lam + 1) / 2.0) - np.log(np.arange(1, mu + 1))
        self.weights = raw / raw.sum()
        self.mu_eff = 1.0 / float(np.sum(self.weights**2))

        self.c_sigma = (self.mu_eff + 2.0) / (d + self.mu_eff + 5.0)
        self.d_sigma = (
            1.0 + 2.0 * max(0.0, math.sqrt((self.mu_eff - 1.0) / (d + 1.0)) - 1.0) + self.c_sigma
        )
        self.c_c = (4.0 + self.mu_eff / d) / (d + 4.0 + 2.0 * self.mu_eff / d)
        c_1 = 2.0 / ((d + 1.3) ** 2 + self.mu_eff)
        c_mu = min(
            1.0 - c_1,
            2.0 * (self.mu_eff - 2.0 + 1.0 / self.mu_eff) / ((d + 2.0) ** 2 + self.mu_eff),
        )
        if self.diagonal:
            # Faster learning is affordable with only d covariance parameters.
            boost = (d + 2.0) / 3.0
            c_1 = min(1.0, c_1 * boost)
            c_mu = min(1.0 - c_1, c_mu * boost)
        self.c_1 = c_1
        self.c_mu = c_mu
        self.chi_n = math.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))

        super().__init__(spec)

        self.sigma = float(h.get("sigma0", 0.5))
        if self.sigma <= 0:
            raise ValueError(f"sigma0 must be > 0, got {self.sigma}")
        self.mean = np.zeros(d)
        self.p_sigma = np.zeros(d)
        self.p_c = np.zeros(d)
        self.clamp_count = 0
        if self.diagonal:
            self.variances = np.ones(d)
        else:
            self.cov = np.eye(d)
            self._basis = np.eye(d)  # eigenvectors of cov
            self._scales = np.ones(d)  # sqrt of eigenvalues

    @property
    def population_size(self) -> int:
        return self._lam

    # -- sampling -----------------------------------------------------------

    def _propose(self, count: int) -> list[np.ndarray]:
        z = self.rng.standard_normal((count, self.spec.dimension))
        if self.diagonal:
            y = z * np.sqrt(self.variances)
        else:
            y = z @ (self._basis * self._scales).T
        x = self.mean + self.sigma * y
        return list(x)

    # -- update -------------------------------------------------------------

    def _c_inv_sqrt(self, v: np.ndarray) -> np.ndarray:
        if self.diagonal:
            return v / np.sqrt(self.variances)
        return self._basis @ ((self._basis.T @ v) / self._scales)

    def _clamp(self, values: np.ndarray, what: str) -> np.ndarray:
        clipped = np.clip(values, STATE_CLAMP_LOW, STATE_CLAMP_HIGH)
        n = int(np.count_nonzero(clipped != values))
        if n:
            self.clamp_count += n
            logger.warning("%s: clamped %d %s entr%s to [%g, %g]",
                           self.spec.kind.value, n, what, "y" if n == 1 else "ies",
                           STATE_CLAMP_LOW, STATE_CLAMP_HIGH)
        return clipped

    def _update_sigma(self) -> None:
        norm = float(np.linalg.norm(self.p_sigma))
        self.sigma *= math.exp((self.c_sigma / self.d_sigma) * (norm / self.chi_n - 1.0))
        clamped = min(max(self.sigma, STATE_CLAMP_LOW), STATE_CLAMP_HIGH)
        if clamped != self.sigma:
            self.clamp_count += 1
            logger.warning("%s: clamped sigma to %g", self.spec.kind.value, clamped)
        self.sigma = clamped

    def _update(self, candidates, fitness, partial, gradients) -> None:
        if partial:
            # Budget-truncated final batch: no full generation to learn from.
            return
        if float(fitness.max()) == float(fitness.min()):
            # No selection signal: do not drift the mean; the step-size path
            # still sees a zero realized step, so sigma keeps adapting.
            self.p_sigma = (1.0 - self.c_sigma) * self.p_sigma
            self._update_sigma()
            return

        order = ranked_order(fitness)
        mu = self.weights.size
        selected = np.asarray([candidates[i] for i in order[:mu]])
        y = (selected - self.mean) / self.sigma
        y_w = self.weights @ y

        self.p_sigma = (1.0 - self.c_sigma) * self.p_sigma + math.sqrt(
            self.c_sigma * (2.0 - self.c_sigma) * self.mu_eff
        ) * self._c_inv_sqrt(y_w)
        gen = self.generation + 1
        hsig_denom = math.sqrt(1.0 - (1.0 - self.c_sigma) ** (2 * gen))
        hsig = float(
            np.linalg.norm(self.p_sigma) / hsig_denom
            < (1.4 + 2.0 / (self.spec.dimension + 1.0)) * self.chi_n
        )
        self.p_c = (1.0 - self.c_c) * self.p_c + hsig * math.sqrt(
            self.c_c * (2.0 - self.c_c) * self.mu_eff
        ) * y_w
        delta_hsig = (1.0 - hsig) * self.c_c * (2.0 - self.c_c)

        if self.diagonal:
            rank_mu = self.weights @ (y**2)
            self.variances = (
                (1.0 - self.c_1 - self.c_mu + self.c_1 * delta_hsig) * self.variances
                + self.c_1 * self.p_c**2
                + self.c_mu * rank_mu
            )
            self.variances = self._clamp(self.variances, "variance")
        else:
            rank_mu = y.T @ (self.weights[:, None] * y)
            cov = (
                (1.0 - self.c_1 - self.c_mu + self.c_1 * delta_hsig) * self.cov
                + self.c_1 * np.outer(self.p_c, self.p_c)
                + self.c_mu * rank_mu
            )
            cov = (cov + cov.T) / 2.0
            eigvals, basis = np.linalg.eigh(cov)
            eigvals = self._clamp(eigvals, "eigenvalue")
            self.cov = (basis * eigvals) @ basis.T
            self._basis = basis
            self._scales = np.sqrt(eigvals)

        self.mean = self.mean + self.sigma * y_w
        self._update_sigma()


class CmaEs(_CmaCore):
    """Full-covariance CMA-ES (quadratic memory/update cost per generation)."""

    diagonal = False


class DiagonalCmaEs(_CmaCore):
    """Diagonal-covariance CMA-ES: linear cost, the default for high dimension."""

    diagonal = True

"""Objective math for noise-injection search.

The search variable is a noise vector fed to some generator; an evaluator
scores each candidate with a raw quality number and one realism number per
image patch.  This module turns those raw scores into the maximized
criterion: both scores are measured relative to the zero-noise baseline,
passed through a pessimistic clamp (losses count in full, gains are
log-damped), and a quadratic penalty on the noise keeps candidates near the
distribution the models were trained on.

Everything here is a pure function of its arguments; all arithmetic is
64-bit floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

__all__ = [
    "NoiseVector",
    "Variant",
    "RawEvaluation",
    "Baseline",
    "CriterionConfig",
    "CriterionParts",
    "as_noise_vector",
    "l_plus",
    "l_plus_slope",
    "quality_score",
    "realism_score",
    "penalty",
    "penalty_gradient",
    "criterion",
    "criterion_parts",
    "compose_criterion_gradient",
]

# A noise vector is a plain 1-D float64 array; `as_noise_vector` is the
# checked constructor used at module boundaries.
NoiseVector = np.ndarray


def as_noise_vector(values: Iterable[float], dimension: int | None = None) -> np.ndarray:
    """Validate and normalize a noise vector (1-D, float64, finite).

    Args:
        values: anything array-like holding the noise amplitudes.
        dimension: when given, the required length (the evaluator handshake
            dimension).

    Raises:
        ValueError: wrong shape, wrong length, or non-finite entries.
    """
    z = np.asarray(values, dtype=np.float64)
    if z.ndim != 1:
        raise ValueError(f"noise vector must be 1-D, got shape {z.shape}")
    if z.size == 0:
        raise ValueError("noise vector must be non-empty")
    if dimension is not None and z.size != dimension:
        raise ValueError(f"noise vector has length {z.size}, expected {dimension}")
    if not np.all(np.isfinite(z)):
        raise ValueError("noise vector contains non-finite entries")
    return z


class Variant(str, Enum):
    """Penalty flavor: C1 uses a fixed coefficient, C2 scales it by the
    baseline blur factor (sharper baseline image -> stronger penalty)."""

    C1 = "c1"
    C2 = "c2"


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class RawEvaluation:
    """One evaluator response for a candidate noise vector.

    Attributes:
        quality: raw quality-model score of the generated image.
        realism_patches: one raw realism score per 128x128 patch.
    """

    quality: float
    realism_patches: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "quality", _require_finite("quality", self.quality))
        patches = tuple(float(p) for p in self.realism_patches)
        if not patches:
            raise ValueError("realism_patches must be non-empty")
        for p in patches:
            if not math.isfinite(p):
                raise ValueError(f"realism patch score must be finite, got {p!r}")
        object.__setattr__(self, "realism_patches", patches)

    @property
    def min_patch(self) -> float:
        return min(self.realism_patches)


@dataclass(frozen=True)
class Baseline:
    """Cached zero-noise reference, computed once per image at start-up.

    Attributes:
        quality0: raw quality of the zero-noise output.
        realism0: minimum patch realism of the zero-noise output.
        blur: blur factor of the zero-noise output (>= 0; larger = sharper).
    """

    quality0: float
    realism0: float
    blur: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "quality0", _require_finite("quality0", self.quality0))
        object.__setattr__(self, "realism0", _require_finite("realism0", self.realism0))
        blur = _require_finite("blur", self.blur)
        if blur < 0:
            raise ValueError(f"blur must be >= 0, got {blur}")
        object.__setattr__(self, "blur", blur)


@dataclass(frozen=True)
class CriterionConfig:
    """Weights and mode switches for the maximized criterion.

    ``pessimistic=False`` drops the L+ clamp and uses raw baseline-relative
    scores (the ablation mode); weights of exactly 0 remove their term
    entirely, with no other code-path change.
    """

    lambda_q: float = 1.0
    lambda_r: float = 1.0
    lambda_p: float = 1.0
    variant: Variant = Variant.C1
    pessimistic: bool = True

    def __post_init__(self) -> None:
        for name in ("lambda_q", "lambda_r", "lambda_p"):
            value = _require_finite(name, getattr(self, name))
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "pessimistic", bool(self.pessimistic))


def l_plus(x: float) -> float:
    """Pessimistic clamp: identity for x <= 0, log(1 + x) for x > 0.

    Continuous and strictly increasing, with slope 1 at 0 from both sides,
    so scores just above the baseline behave like raw scores while large
    gains are damped.
    """
    x = float(x)
    if x > 0.0:
        return math.log1p(x)
    return x


def l_plus_slope(x: float) -> float:
    """Derivative of :func:`l_plus` (1 for x <= 0, 1/(1+x) for x > 0)."""
    x = float(x)
    if x > 0.0:
        return 1.0 / (1.0 + x)
    return 1.0


def quality_score(evaluation: RawEvaluation, base: Baseline, cfg: CriterionConfig) -> float:
    """Baseline-relative quality score, clamped when pessimistic."""
    delta = evaluation.quality - base.quality0
    return l_plus(delta) if cfg.pessimistic else delta


def realism_score(evaluation: RawEvaluation, base: Baseline, cfg: CriterionConfig) -> float:
    """Baseline-relative worst-patch realism score, clamped when pessimistic.

    The minimum over patches makes a single bad patch veto the candidate.
    """
    delta = evaluation.min_patch - base.realism0
    return l_plus(delta) if cfg.pessimistic else delta


def _penalty_coefficient(base: Baseline, cfg: CriterionConfig) -> float:
    if cfg.variant is Variant.C2:
        return cfg.lambda_p * base.blur
    return cfg.lambda_p


def penalty(z: np.ndarray, base: Baseline, cfg: CriterionConfig) -> float:
    """Quadratic penalty term (coef / d) * ||z||^2, subtracted from the score."""
    coef = _penalty_coefficient(base, cfg)
    if coef == 0.0:
        # Exact weight-zeroing: never touches ||z|| (and avoids 0 * inf).
        return 0.0
    return (coef / z.size) * float(np.dot(z, z))


def penalty_gradient(z: np.ndarray, base: Baseline, cfg: CriterionConfig) -> np.ndarray:
    coef = _penalty_coefficient(base, cfg)
    if coef == 0.0:
        return np.zeros_like(z)
    return (2.0 * coef / z.size) * z


@dataclass(frozen=True)
class CriterionParts:
    """Criterion value with its additive pieces, for reports."""

    s_q: float
    s_r: float
    penalty: float
    value: float


def criterion_parts(
    z: np.ndarray, evaluation: RawEvaluation, base: Baseline, cfg: CriterionConfig
) -> CriterionParts:
    z = as_noise_vector(z)
    s_q = quality_score(evaluation, base, cfg)
    s_r = realism_score(evaluation, base, cfg)
    pen = penalty(z, base, cfg)
    q_term = cfg.lambda_q * s_q if cfg.lambda_q != 0.0 else 0.0
    r_term = cfg.lambda_r * s_r if cfg.lambda_r != 0.0 else 0.0
    return CriterionParts(s_q=s_q, s_r=s_r, penalty=pen, value=q_term + r_term - pen)


def criterion(z: np.ndarray, evaluation: RawEvaluation, base: Baseline, cfg: CriterionConfig) -> float:
    """The maximized objective: lambda_q*S_q + lambda_r*S_r - penalty.

    At z = 0 with pessimistic scores and a baseline-consistent evaluation
    this is exactly 0 for both variants.
    """
    return criterion_parts(z, evaluation, base, cfg).value


def compose_criterion_gradient(
    z: np.ndarray,
    evaluation: RawEvaluation,
    base: Baseline,
    cfg: CriterionConfig,
    quality_gradient: np.ndarray,
    realism_gradient: np.ndarray,
) -> np.ndarray:
    """Chain-rule composition of the criterion gradient from score gradients.

    Args:
        quality_gradient: d(raw quality)/dz.
        realism_gradient: d(min-patch realism)/dz.
    """
    z = as_noise_vector(z)
    grad = -penalty_gradient(z, base, cfg)
    if cfg.lambda_q != 0.0:
        slope = l_plus_slope(evaluation.quality - base.quality0) if cfg.pessimistic else 1.0
        grad = grad + cfg.lambda_q * slope * np.asarray(quality_gradient, dtype=np.float64)
    if cfg.lambda_r != 0.0:
        slope = l_plus_slope(evaluation.min_patch - base.realism0) if cfg.pessimistic else 1.0
        grad = grad + cfg.lambda_r * slope * np.asarray(realism_gradient, dtype=np.float64)
    return grad

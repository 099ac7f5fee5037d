"""Built-in deterministic evaluators for desk-scale testing and benchmarks.

Three closed-form families stand in for a real generator/scorer stack:

* ``separable-quadratic`` — quality is a separable concave quadratic with a
  per-coordinate curvature ramp (an ellipsoid when the ramp is wide); patch
  scores are optional quadratics whose minimum creates creases.
* ``rotated-quadratic`` — the same idea under a seeded rotation, so the
  problem is not coordinate-separable.
* ``plateau-artifact`` — quality keeps rising with the noise norm while one
  patch score collapses past a norm threshold: the configuration where
  worst-patch realism must veto quality-only optima.

Everything is a pure function of (spec, z); repeated evaluations are
bit-identical, and evaluate(0) reproduces the handshake baseline exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from ..criterion import Baseline, RawEvaluation, as_noise_vector
from .base import Capabilities, EvaluatorHandle

__all__ = [
    "SyntheticKind",
    "SyntheticEvaluatorSpec",
    "SyntheticHandle",
    "open_builtin",
    "builtin_spec_from_identifier",
]

# Squared-distance terms are capped here so raw scores stay finite (and JSON
# serializable) for every finite z, however far a raw-mode run wanders.
_SATURATION = 1e300


def _saturate(value: float) -> float:
    if not math.isfinite(value) or value > _SATURATION:
        return _SATURATION
    return value


class SyntheticKind(str, Enum):
    SEPARABLE_QUADRATIC = "separable-quadratic"
    ROTATED_QUADRATIC = "rotated-quadratic"
    PLATEAU_ARTIFACT = "plateau-artifact"


@dataclass(frozen=True)
class SyntheticEvaluatorSpec:
    """Deterministic evaluator family member: kind + dimension + seed + knobs.

    ``parameters`` keys (all float; per-kind defaults apply):

    common: ``q0`` raw quality at the optimum region anchor, ``r0`` flat
    patch level, ``blur`` declared blur factor, ``gradients`` (1 enables
    analytic score gradients).

    separable/rotated: ``curv_min``/``curv_max`` curvature ramp ends
    (rotated uses ``cond``), ``z_star`` constant optimum coordinate (else
    drawn uniformly from [``z_star_min``, ``z_star_max``] per coordinate),
    ``c_q`` quality headroom (default makes quality(0) = q0),
    ``patch_curv``/``patch_spread`` patch quadratics (separable only).

    plateau: ``gain`` quality rise per squared norm, ``cap`` quality
    saturation scale, ``threshold`` collapse radius, ``slope`` collapse
    steepness, ``artifact_margin`` how far below r0 counts as an artifact.
    """

    kind: SyntheticKind
    dimension: int
    seed: int = 0
    parameters: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SyntheticKind(self.kind))
        object.__setattr__(self, "parameters", dict(self.parameters))
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")

    def identifier(self) -> str:
        parts = [f"dim={self.dimension}", f"seed={self.seed}"]
        for key in sorted(self.parameters):
            parts.append(f"{key}={self.parameters[key]!r}".replace("'", ""))
        return f"builtin:{self.kind.value}?" + "&".join(parts)


def builtin_spec_from_identifier(text: str) -> SyntheticEvaluatorSpec:
    """Parse 'NAME' or 'NAME?dim=50&seed=3&key=value' into a spec."""
    name, _, query = text.partition("?")
    kind = SyntheticKind(name.strip())
    dimension = None
    seed = 0
    params: dict[str, float] = {}
    if query:
        for item in query.split("&"):
            if not item:
                continue
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"malformed evaluator parameter {item!r}")
            key = key.strip()
            if key == "dim":
                dimension = int(value)
            elif key == "seed":
                seed = int(value)
            else:
                params[key] = float(value)
    if dimension is None:
        dimension = _DEFAULT_DIMENSION[kind]
    return SyntheticEvaluatorSpec(kind=kind, dimension=dimension, seed=seed, parameters=params)


_DEFAULT_DIMENSION = {
    SyntheticKind.SEPARABLE_QUADRATIC: 10,
    SyntheticKind.ROTATED_QUADRATIC: 10,
    SyntheticKind.PLATEAU_ARTIFACT: 2,
}


class SyntheticHandle(EvaluatorHandle):
    """Closed-form evaluator; see :class:`SyntheticEvaluatorSpec`."""

    def __init__(self, spec: SyntheticEvaluatorSpec) -> None:
        self.spec = spec
        self.evaluator_id = spec.identifier()
        self.dimension = spec.dimension
        rng = np.random.default_rng(spec.seed)
        p = dict(spec.parameters)
        self._q0 = float(p.pop("q0", 50.0))
        self._r0 = float(p.pop("r0", 0.0))
        blur = float(p.pop("blur", 1.0))
        with_gradients = bool(p.pop("gradients", 0.0))
        d = spec.dimension

        if spec.kind is SyntheticKind.SEPARABLE_QUADRATIC:
            curv_min = float(p.pop("curv_min", 1.0))
            curv_max = float(p.pop("curv_max", curv_min))
            self._curv = np.geomspace(curv_min, curv_max, d)
            if "z_star_scale" in p:
                # Balanced ellipsoid: optimum coordinates scale as 1/sqrt(a_i)
                # so every axis contributes comparable quality gain, which
                # makes progress require per-axis step scales.
                scale = float(p.pop("z_star_scale"))
                lo = float(p.pop("z_star_min", 0.02))
                hi = float(p.pop("z_star_max", 2.0))
                jitter = rng.uniform(0.8, 1.2, d)
                signs = rng.choice([-1.0, 1.0], d)
                self._z_star = signs * np.clip(
                    scale * jitter / np.sqrt(self._curv), lo, hi
                )
            else:
                self._z_star = self._draw_z_star(p, rng, d)
            self._c_q = float(p.pop("c_q", float(self._curv @ self._z_star**2)))
            # Optional deterministic ruggedness: a cosine ripple that is 0 at
            # the optimum and <= 0 elsewhere, so the peak stays at z_star.
            self._ripple_amp = float(p.pop("ripple_amp", 0.0))
            self._ripple_freq = 2.0 * math.pi / float(p.pop("ripple_wavelength", 0.25))
            patch_curv = float(p.pop("patch_curv", 0.0))
            patch_spread = float(p.pop("patch_spread", 0.0))
            self._patch_curv = patch_curv
            centers = np.repeat(self._z_star[None, :], 3, axis=0)
            if patch_spread != 0.0:
                offsets = rng.standard_normal((3, d))
                offsets /= np.linalg.norm(offsets, axis=1, keepdims=True)
                centers = centers + patch_spread * offsets
            self._patch_centers = centers
        elif spec.kind is SyntheticKind.ROTATED_QUADRATIC:
            cond = float(p.pop("cond", 10.0))
            scale = float(p.pop("scale", 1.0))
            eigs = np.geomspace(1.0, cond, d) * scale
            gauss = rng.standard_normal((d, d))
            q, r = np.linalg.qr(gauss)
            q = q * np.sign(np.diag(r))  # deterministic orientation
            self._quad = (q * eigs) @ q.T
            self._z_star = self._draw_z_star(p, rng, d)
            self._c_q = float(p.pop("c_q", float(self._z_star @ self._quad @ self._z_star)))
        elif spec.kind is SyntheticKind.PLATEAU_ARTIFACT:
            self._gain = float(p.pop("gain", 1.0))
            self._cap = float(p.pop("cap", 1e6))
            self._threshold = float(p.pop("threshold", 1.0))
            self._slope = float(p.pop("slope", 25.0))
            self._artifact_margin = float(p.pop("artifact_margin", 1.0))
        else:  # pragma: no cover
            raise ValueError(f"unknown synthetic kind {spec.kind}")
        if p:
            raise ValueError(f"unknown parameters for {spec.kind.value}: {sorted(p)}")

        self.capabilities = Capabilities(
            supports_gradient=with_gradients, supports_batch=True, max_inflight=0
        )
        baseline_eval = self.evaluate(np.zeros(d))
        self.baseline = Baseline(
            quality0=baseline_eval.quality,
            realism0=baseline_eval.min_patch,
            blur=blur,
        )
        self.patch_count = len(baseline_eval.realism_patches)

    @staticmethod
    def _draw_z_star(p: dict, rng: np.random.Generator, d: int) -> np.ndarray:
        if "z_star" in p:
            return np.full(d, float(p.pop("z_star")))
        lo = float(p.pop("z_star_min", 0.5))
        hi = float(p.pop("z_star_max", 1.5))
        return rng.uniform(lo, hi, d)

    # -- scoring ------------------------------------------------------------

    def evaluate(self, z: np.ndarray) -> RawEvaluation:
        z = as_noise_vector(z, self.dimension)
        with np.errstate(over="ignore"):  # overflow saturates by design
            return self._evaluate(z)

    def _evaluate(self, z: np.ndarray) -> RawEvaluation:
        kind = self.spec.kind
        if kind is SyntheticKind.SEPARABLE_QUADRATIC:
            diff = z - self._z_star
            quality = self._q0 + self._c_q - _saturate(float(self._curv @ diff**2))
            if self._ripple_amp != 0.0:
                quality += self._ripple_amp * float(np.sum(np.cos(self._ripple_freq * diff) - 1.0))
            if self._patch_curv == 0.0:
                patches = (self._r0,) * 3
            else:
                patches = tuple(
                    self._r0 - self._patch_curv * _saturate(float(self._curv @ (z - c) ** 2))
                    for c in self._patch_centers
                )
        elif kind is SyntheticKind.ROTATED_QUADRATIC:
            diff = z - self._z_star
            quality = self._q0 + self._c_q - _saturate(float(diff @ self._quad @ diff))
            patches = (self._r0,) * 3
        else:
            u = _saturate(float(np.dot(z, z)))
            quality = self._q0 + self._gain * u / (1.0 + u / self._cap)
            excess = max(0.0, u - self._threshold**2)
            patches = (self._r0, self._r0 - self._slope * excess, self._r0)
        return RawEvaluation(quality=quality, realism_patches=patches)

    def score_gradients(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Analytic (d quality/dz, d min-patch-realism/dz); requires gradients=1."""
        if not self.capabilities.supports_gradient:
            raise RuntimeError("this evaluator was opened without gradient support")
        z = as_noise_vector(z, self.dimension)
        kind = self.spec.kind
        if kind is SyntheticKind.SEPARABLE_QUADRATIC:
            gq = -2.0 * self._curv * (z - self._z_star)
            if self._ripple_amp != 0.0:
                gq -= self._ripple_amp * self._ripple_freq * np.sin(
                    self._ripple_freq * (z - self._z_star)
                )
            if self._patch_curv == 0.0:
                gr = np.zeros_like(z)
            else:
                values = [float(self._curv @ (z - c) ** 2) for c in self._patch_centers]
                worst = self._patch_centers[int(np.argmax(values))]
                gr = -2.0 * self._patch_curv * self._curv * (z - worst)
            return gq, gr
        if kind is SyntheticKind.ROTATED_QUADRATIC:
            return -2.0 * (self._quad @ (z - self._z_star)), np.zeros_like(z)
        u = float(np.dot(z, z))
        gq = self._gain * (2.0 * z) / (1.0 + u / self._cap) ** 2
        if u > self._threshold**2:
            gr = -self._slope * 2.0 * z
        else:
            gr = np.zeros_like(z)
        return gq, gr

    # -- plateau-specific helpers --------------------------------------------

    @property
    def artifact_threshold(self) -> float:
        """Patch score below which a patch counts as an artifact (plateau kind)."""
        if self.spec.kind is not SyntheticKind.PLATEAU_ARTIFACT:
            raise AttributeError("artifact_threshold is defined for plateau-artifact only")
        return self._r0 - self._artifact_margin


def open_builtin(spec: SyntheticEvaluatorSpec) -> SyntheticHandle:
    """Construct a built-in evaluator handle (baseline computed at z = 0)."""
    return SyntheticHandle(spec)

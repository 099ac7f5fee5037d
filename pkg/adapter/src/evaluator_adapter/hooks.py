"""Model hook loading and the classical fallback.

A hooks module exposes three callables::

    generate(z: np.ndarray, image: np.ndarray) -> np.ndarray   # (h, w, c) in [0, 1]
    quality(image: np.ndarray) -> float
    realism(patch: np.ndarray) -> float

and may declare ``noise_dimension`` to be validated against the configured
dimension.  This is where real generator/scorer models plug in; the
fallback needs none of that: it returns the input image unchanged, scores
quality by Laplacian sharpness, and scores every patch 0.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .imageops import blur_factor

__all__ = ["Hooks", "load_hooks", "fallback_hooks", "HookError"]


class HookError(RuntimeError):
    pass


@dataclass(frozen=True)
class Hooks:
    generate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    quality: Callable[[np.ndarray], float]
    realism: Callable[[np.ndarray], float]


def fallback_hooks() -> Hooks:
    return Hooks(
        generate=lambda z, image: image,
        quality=blur_factor,
        realism=lambda patch: 0.0,
    )


def load_hooks(module_path: str, dimension: int) -> Hooks:
    try:
        module = importlib.import_module(module_path)
    except ImportError as exc:
        raise HookError(f"cannot import hooks module {module_path!r}: {exc}") from exc
    for name in ("generate", "quality", "realism"):
        if not callable(getattr(module, name, None)):
            raise HookError(f"hooks module {module_path!r} must define callable {name}()")
    declared = getattr(module, "noise_dimension", None)
    if declared is not None and int(declared) != dimension:
        raise HookError(
            f"hooks module declares noise_dimension={declared}, configured dimension is {dimension}"
        )
    return Hooks(generate=module.generate, quality=module.quality, realism=module.realism)

"""Single-threaded JSON-lines request loop implementing the wire protocol.

One message per line on stdin/stdout::

    -> {"type": "init"}
    <- {"type": "init_ok", "dim": .., "patches": .., "baseline_quality": ..,
        "baseline_realism": .., "blur": .., "supports_gradient": false,
        "max_inflight": 1}
    -> {"type": "eval", "id": N, "z": [..]}
    <- {"type": "eval_ok", "id": N, "quality": .., "realism_patches": [..]}
    -> {"type": "shutdown"}   then exit 0.

Malformed or unsupported requests get an error reply and the loop keeps
serving; a hook exception answers code "hook_failure".  The in-flight
window is 1: deep-model hooks are typically not reentrant.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .hooks import HookError, Hooks, fallback_hooks, load_hooks
from .imageops import DEFAULT_PATCH_SIZE, load_image, tile_origins

__all__ = ["AdapterConfig", "serve"]


@dataclass(frozen=True)
class AdapterConfig:
    image_path: str
    dimension: int
    patch_size: int = DEFAULT_PATCH_SIZE
    hooks_module: str | None = None
    fallback: bool = False

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.patch_size < 1:
            raise ValueError(f"patch size must be >= 1, got {self.patch_size}")
        if bool(self.hooks_module) == bool(self.fallback):
            raise ValueError("exactly one of hooks_module or fallback must be set")


def _reply(stdout, message: dict) -> None:
    stdout.write(json.dumps(message, allow_nan=False, separators=(",", ":")) + "\n")
    stdout.flush()


def _error(stdout, request_id, code: str) -> None:
    _reply(stdout, {"type": "error", "id": request_id, "code": code})


def _finite(value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise HookError(f"hook returned non-finite score {value!r}")
    return value


class _Scorer:
    """Applies hooks to one candidate: generate, score, patch-score."""

    def __init__(self, config: AdapterConfig, hooks: Hooks, image: np.ndarray) -> None:
        self.config = config
        self.hooks = hooks
        self.image = image

    def score(self, z: np.ndarray) -> tuple[float, list[float]]:
        generated = np.asarray(self.hooks.generate(z, self.image), dtype=np.float64)
        if generated.ndim == 2:
            generated = generated[:, :, np.newaxis]
        if generated.ndim != 3:
            raise HookError(f"generate() returned shape {generated.shape}")
        quality = _finite(self.hooks.quality(generated))
        height, width = generated.shape[:2]
        whole, origins = tile_origins(width, height, self.config.patch_size)
        patch = self.config.patch_size
        patches = []
        for x, y in origins:
            crop = generated if whole else generated[y : y + patch, x : x + patch]
            patches.append(_finite(self.hooks.realism(crop)))
        return quality, patches


def serve(config: AdapterConfig, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    image = load_image(config.image_path)
    hooks = fallback_hooks() if config.fallback else load_hooks(config.hooks_module, config.dimension)
    scorer = _Scorer(config, hooks, image)

    # Zero-noise baseline, computed once through the same scoring path that
    # serves eval requests, so evaluate(0) reproduces it exactly.
    baseline_z = np.zeros(config.dimension)
    baseline_image = np.asarray(hooks.generate(baseline_z, image), dtype=np.float64)
    if baseline_image.ndim == 2:
        baseline_image = baseline_image[:, :, np.newaxis]
    from .imageops import blur_factor

    baseline_quality, baseline_patches = scorer.score(baseline_z)
    blur = blur_factor(baseline_image)

    print(
        f"adapter ready: image {config.image_path}, dim {config.dimension}, "
        f"{len(baseline_patches)} patches",
        file=stderr,
        flush=True,
    )

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            if not isinstance(request, dict) or not isinstance(request.get("type"), str):
                raise ValueError("not a protocol object")
        except ValueError:
            _error(stdout, None, "malformed")
            continue
        rtype = request["type"]
        request_id = request.get("id")
        id_ok = isinstance(request_id, int) and not isinstance(request_id, bool)

        if rtype == "init":
            _reply(
                stdout,
                {
                    "type": "init_ok",
                    "dim": config.dimension,
                    "patches": len(baseline_patches),
                    "baseline_quality": baseline_quality,
                    "baseline_realism": min(baseline_patches),
                    "blur": blur,
                    "supports_gradient": False,
                    "max_inflight": 1,
                },
            )
        elif rtype == "eval":
            if not id_ok or not _valid_candidate(request.get("z"), config.dimension):
                _error(stdout, request_id if id_ok else None, "bad_request")
                continue
            try:
                quality, patches = scorer.score(np.asarray(request["z"], dtype=np.float64))
            except Exception as exc:
                print(f"hook failure: {exc}", file=stderr, flush=True)
                _error(stdout, request_id, "hook_failure")
                continue
            _reply(
                stdout,
                {
                    "type": "eval_ok",
                    "id": request_id,
                    "quality": quality,
                    "realism_patches": patches,
                },
            )
        elif rtype == "shutdown":
            return 0
        else:
            _error(stdout, request_id if id_ok else None, "unsupported")
    return 0


def _valid_candidate(z, dimension: int) -> bool:
    if not isinstance(z, list) or len(z) != dimension:
        return False
    for value in z:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        if not math.isfinite(float(value)):
            return False
    return True

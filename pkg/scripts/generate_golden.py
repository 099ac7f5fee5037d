#!/usr/bin/env python3
"""Regenerate the shared golden fixtures under golden/.

The expected values are computed by plain-Python reference code (explicit
loops, math module) that is deliberately independent of both packages'
implementations.  Images are deterministic 8-bit noise from fixed seeds.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from PIL import Image

ROOT = Path(__file__).resolve().parents[1] / "golden"

TILING_CASES = [
    (512, 384),
    (300, 200),
    (128, 128),
    (129, 257),
    (640, 480),
    (131, 128),
    (100, 150),  # smaller than a patch in one dimension
    (64, 64),
]

IMAGE_CASES = [
    ("img_00.png", 16, 16, "L", 100),
    ("img_01.png", 16, 16, "RGB", 101),
    ("img_02.png", 24, 18, "L", 102),
    ("img_03.png", 18, 24, "RGB", 103),
    ("img_04.png", 32, 32, "L", 104),
]


def reference_starts(extent: int, patch: int) -> list[int]:
    count = math.ceil(extent / patch)
    return [min(i * patch, extent - patch) for i in range(count)]


def reference_tiling(width: int, height: int, patch: int = 128):
    if width < patch or height < patch:
        return True, [(0, 0)]
    xs = reference_starts(width, patch)
    ys = reference_starts(height, patch)
    return False, [(x, y) for y in ys for x in xs]


def reference_grayscale(pixels):
    out = []
    for row in pixels:
        out.append([0.299 * r + 0.587 * g + 0.114 * b for (r, g, b) in row])
    return out


def reference_blur(field) -> float:
    h, w = len(field), len(field[0])

    def at(y, x):
        return field[min(max(y, 0), h - 1)][min(max(x, 0), w - 1)]

    lap = []
    for y in range(h):
        for x in range(w):
            lap.append(
                at(y - 1, x) + at(y + 1, x) + at(y, x - 1) + at(y, x + 1) - 4.0 * at(y, x)
            )
    mean = sum(lap) / len(lap)
    var = sum((v - mean) ** 2 for v in lap) / len(lap)
    return math.sqrt(var) / math.sqrt(1000.0)


def main() -> None:
    (ROOT / "images").mkdir(parents=True, exist_ok=True)

    tiling = []
    for width, height in TILING_CASES:
        whole, origins = reference_tiling(width, height)
        tiling.append(
            {
                "width": width,
                "height": height,
                "patch": 128,
                "whole_image": whole,
                "origins": [[x, y] for x, y in origins],
            }
        )
    (ROOT / "tiling.json").write_text(json.dumps(tiling, indent=2) + "\n")

    blur_entries = []
    for name, width, height, mode, seed in IMAGE_CASES:
        rng = np.random.default_rng(seed)
        if mode == "L":
            raw = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
        else:
            raw = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
        Image.fromarray(raw, mode=mode).save(ROOT / "images" / name)

        scaled = raw.astype(np.float64) / 255.0
        if mode == "RGB":
            field = reference_grayscale(
                [[tuple(px) for px in row] for row in scaled.tolist()]
            )
        else:
            field = scaled.tolist()
        blur_entries.append({"file": f"images/{name}", "mode": mode, "blur": reference_blur(field)})
    (ROOT / "blur.json").write_text(json.dumps(blur_entries, indent=2) + "\n")
    print(f"wrote {ROOT / 'tiling.json'} and {ROOT / 'blur.json'}")


if __name__ == "__main__":
    main()

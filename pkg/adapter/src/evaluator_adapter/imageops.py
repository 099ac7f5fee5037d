"""Image kernels the adapter needs: grayscale, blur factor, patch tiling.

Conventions are pinned by the shared golden fixtures (see golden/ at the
repository root): Rec.601 luma weights, 4-neighbor Laplacian with replicate
padding, population standard deviation divided by sqrt(1000), and clamped
patch tiling where edge patches overlap instead of padding.
"""

from __future__ import annotations

import math

import numpy as np

DEFAULT_PATCH_SIZE = 128

_LUMA = np.array([0.299, 0.587, 0.114])


def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG into an (h, w, c) float64 array in [0, 1]."""
    from PIL import Image

    with Image.open(path) as img:
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.float64) / 255.0
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    return arr


def grayscale(image: np.ndarray) -> np.ndarray:
    if image.ndim == 3 and image.shape[2] == 3:
        return image @ _LUMA
    if image.ndim == 3:
        return image[:, :, 0]
    return image


def laplacian(field: np.ndarray) -> np.ndarray:
    padded = np.pad(field, 1, mode="edge")
    vertical = padded[:-2, 1:-1] + padded[2:, 1:-1]
    horizontal = padded[1:-1, :-2] + padded[1:-1, 2:]
    return (vertical + horizontal) - 4.0 * field


def blur_factor(image: np.ndarray) -> float:
    """Population std of the Laplacian of the luma channel, over sqrt(1000)."""
    return float(np.std(laplacian(grayscale(image)))) / math.sqrt(1000.0)


def tile_origins(width: int, height: int, patch: int = DEFAULT_PATCH_SIZE):
    """Patch origins covering the image; (whole_image, [(x, y), ...])."""
    if width < patch or height < patch:
        return True, [(0, 0)]

    def starts(extent: int) -> list[int]:
        count = -(-extent // patch)
        return [min(i * patch, extent - patch) for i in range(count)]

    xs = starts(width)
    ys = starts(height)
    return False, [(x, y) for y in ys for x in xs]

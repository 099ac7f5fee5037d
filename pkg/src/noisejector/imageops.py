"""Deterministic image kernels: grayscale, Laplacian, blur factor, patch tiling.

Images are float64 arrays in [0, 1], shape (height, width, channels) with 1
or 3 channels.  These kernels back the blur-scaled penalty variant and the
patch grid that realism scoring runs on; evaluators that wrap real images
use them to fill the handshake baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Image",
    "PatchGrid",
    "load_png",
    "to_grayscale",
    "laplacian",
    "blur_factor",
    "tile_patches",
    "DEFAULT_PATCH_SIZE",
]

DEFAULT_PATCH_SIZE = 128

# Rec.601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])

_LAPLACIAN_SCALE = math.sqrt(1000.0)


@dataclass(frozen=True)
class Image:
    """Validated image container: (h, w, c) float64 data in [0, 1]."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, np.newaxis]
        if data.ndim != 3:
            raise ValueError(f"image data must be 2-D or 3-D, got shape {data.shape}")
        if data.shape[2] not in (1, 3):
            raise ValueError(f"image must have 1 or 3 channels, got {data.shape[2]}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("image contains non-finite values")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def load_png(path) -> Image:
    """Read an 8-bit PNG as a [0, 1] image (grayscale or RGB)."""
    from PIL import Image as PILImage

    with PILImage.open(path) as img:
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB" if ("A" in img.mode or len(img.getbands()) > 1) else "L")
        arr = np.asarray(img, dtype=np.float64) / 255.0
    return Image(arr)


def to_grayscale(img: Image) -> Image:
    """Collapse to one luma channel (0.299/0.587/0.114); identity on 1-channel."""
    if img.channels == 1:
        return img
    gray = img.data @ _LUMA
    return Image(np.clip(gray, 0.0, 1.0))


def laplacian(img: Image) -> np.ndarray:
    """4-neighbor Laplacian with replicate (clamp-to-edge) padding.

    Input must be single-channel; output is an (h, w) float field of the
    same size.  The kernel sums to zero, so constant images map to zero.
    """
    if img.channels != 1:
        raise ValueError("laplacian expects a single-channel image")
    field = img.data[:, :, 0]
    padded = np.pad(field, 1, mode="edge")
    # Symmetric pair grouping keeps the result bit-identical under flips.
    vertical = padded[:-2, 1:-1] + padded[2:, 1:-1]
    horizontal = padded[1:-1, :-2] + padded[1:-1, 2:]
    return (vertical + horizontal) - 4.0 * field


def blur_factor(img: Image) -> float:
    """Sharpness measure: population std of the Laplacian, divided by sqrt(1000).

    0 iff the Laplacian field is constant (e.g. a constant image); larger
    means sharper.  The sqrt(1000) divisor keeps the value on the same order
    of magnitude as the unit penalty coefficient.
    """
    field = laplacian(to_grayscale(img))
    return float(np.std(field)) / _LAPLACIAN_SCALE


@dataclass(frozen=True)
class PatchGrid:
    """Covering grid of fixed-size patches.

    ``origins`` are (x, y) top-left corners; every patch lies fully inside
    the image and their union covers every pixel.  ``whole_image`` flags the
    degenerate case of an image smaller than the patch in either dimension,
    where the single "patch" is the full image.
    """

    patch_size: int
    origins: tuple[tuple[int, int], ...]
    whole_image: bool = False


def _starts(extent: int, patch: int) -> list[int]:
    # Interior origins at multiples of `patch`; the final origin is clamped
    # so the last patch ends exactly at the image border (overlap, not pad).
    count = -(-extent // patch)
    return [min(i * patch, extent - patch) for i in range(count)]


def tile_patches(width: int, height: int, patch: int = DEFAULT_PATCH_SIZE) -> PatchGrid:
    """Tile a width x height image with patch x patch crops covering all pixels.

    Images smaller than the patch in either dimension yield one whole-image
    patch at (0, 0), flagged via ``whole_image`` (the caller decides whether
    to resize).
    """
    if width < 1 or height < 1:
        raise ValueError(f"image extent must be positive, got {width}x{height}")
    if patch < 1:
        raise ValueError(f"patch size must be positive, got {patch}")
    if width < patch or height < patch:
        return PatchGrid(patch_size=patch, origins=((0, 0),), whole_image=True)
    xs = _starts(width, patch)
    ys = _starts(height, patch)
    origins = tuple((x, y) for y in ys for x in xs)
    return PatchGrid(patch_size=patch, origins=origins)

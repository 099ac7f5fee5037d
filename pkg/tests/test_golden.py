"""Agreement with the committed golden fixtures shared with the adapter."""

import json
from pathlib import Path

import pytest

from noisejector.imageops import blur_factor, load_png, tile_patches

GOLDEN = Path(__file__).resolve().parents[1] / "golden"


def test_tiling_matches_golden():
    cases = json.loads((GOLDEN / "tiling.json").read_text())
    assert cases
    for case in cases:
        grid = tile_patches(case["width"], case["height"], case["patch"])
        assert grid.whole_image == case["whole_image"], case
        assert [[x, y] for x, y in grid.origins] == case["origins"], case


def test_blur_matches_golden():
    cases = json.loads((GOLDEN / "blur.json").read_text())
    assert len(cases) == 5
    for case in cases:
        img = load_png(GOLDEN / case["file"])
        assert blur_factor(img) == pytest.approx(case["blur"], abs=1e-9), case["file"]

"""Cross-component agreement with the shared golden fixtures."""

import json

import pytest

from evaluator_adapter.imageops import blur_factor, load_image, tile_origins


def test_tiling_matches_golden(golden_dir):
    cases = json.loads((golden_dir / "tiling.json").read_text())
    assert cases
    for case in cases:
        whole, origins = tile_origins(case["width"], case["height"], case["patch"])
        assert whole == case["whole_image"], case
        assert [[x, y] for x, y in origins] == case["origins"], case


def test_blur_matches_golden(golden_dir):
    cases = json.loads((golden_dir / "blur.json").read_text())
    assert len(cases) == 5
    for case in cases:
        image = load_image(golden_dir / case["file"])
        assert blur_factor(image) == pytest.approx(case["blur"], abs=1e-9), case["file"]

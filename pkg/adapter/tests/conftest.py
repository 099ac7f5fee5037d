import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from driver import AdapterProcess

REPO_ROOT = Path(__file__).resolve().parents[2]
GOLDEN = REPO_ROOT / "golden"


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture
def large_image(tmp_path) -> Path:
    """A 260x200 noise PNG: 3x2 patch grid with clamped edge origins."""
    from PIL import Image

    rng = np.random.default_rng(42)
    raw = rng.integers(0, 256, size=(200, 260), dtype=np.uint8)
    path = tmp_path / "large.png"
    Image.fromarray(raw, mode="L").save(path)
    return path


@pytest.fixture
def adapter_factory():
    procs = []

    def make(args, env=None) -> AdapterProcess:
        proc = AdapterProcess(args, env=env)
        procs.append(proc)
        return proc

    yield make
    for proc in procs:
        proc.kill()


@pytest.fixture
def adapter(adapter_factory, large_image) -> AdapterProcess:
    return adapter_factory(["--image", str(large_image), "--dim", "6", "--fallback"])

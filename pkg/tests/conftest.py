import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

REFERENCE_EVALUATOR = f"{sys.executable} -m noisejector.reference_evaluator"


@pytest.fixture
def reference_evaluator_command() -> str:
    return REFERENCE_EVALUATOR

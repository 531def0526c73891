"""Session fixtures around the checked-in tiny model."""

from pathlib import Path

import pytest

from lmsidecar import load_scorer

MODEL_DIR = Path(__file__).parent / "data" / "tiny-model"


@pytest.fixture(scope="session")
def scorer():
    if not MODEL_DIR.is_dir():
        pytest.fail(
            f"missing model fixture at {MODEL_DIR}; run tests/regen_model.py"
        )
    return load_scorer(str(MODEL_DIR))

import os
from pathlib import Path

import pytest

FIXTURES = Path(os.environ.get("FOMC_ABSA_FIXTURES", Path(__file__).resolve().parents[2] / "tests" / "fixtures"))


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES

import pathlib

import numpy as np
import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def pytest_sessionstart(session):
    # compile the apportionment kernel once, outside any timed test
    from lmac.models import quantize_weights

    quantize_weights(np.ones(257, dtype=np.int64))


@pytest.fixture(scope="session")
def english_text() -> str:
    return (FIXTURES / "english_fixture.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def english_fixture_path() -> pathlib.Path:
    return FIXTURES / "english_fixture.txt"

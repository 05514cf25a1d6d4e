import json
from pathlib import Path

import pytest
from hypothesis import settings

from pha_vqe import load_h2, make_partial

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

GOLDEN = json.loads((Path(__file__).parent / "golden" / "h2_oracle.json").read_text())


@pytest.fixture(scope="session")
def h2():
    return load_h2()


@pytest.fixture(scope="session")
def h2_partial(h2):
    return make_partial(h2)


@pytest.fixture(scope="session")
def golden():
    return GOLDEN

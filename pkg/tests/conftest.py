import json
from functools import lru_cache
from pathlib import Path

import pytest

from sigma2lab.manifold.spaces import build_space, parse_space

DATA = Path(__file__).parent / "data"


@lru_cache(maxsize=None)
def space(shorthand: str):
    """Build (domain, metric) once per shorthand for the whole session."""
    return build_space(parse_space(shorthand))


@pytest.fixture(scope="session")
def oracle():
    return json.loads((DATA / "oracle_values.json").read_text())


@pytest.fixture(scope="session")
def baselines():
    return json.loads((DATA / "baselines.json").read_text())

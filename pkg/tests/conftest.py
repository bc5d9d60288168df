import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quadfreq import Instance, load_instance, load_tour

DATA = Path(__file__).parent / "data"

# published optimal tour lengths of the bundled fixtures
FIXTURE_OPTIMA = {
    "gr17": 2085,
    "gr24": 1272,
    "att48": 10628,
    "eil51": 426,
    "eil76": 538,
    "ulysses16": 6859,
}


def fixture_path(name: str, suffix: str = ".tsp") -> Path:
    return DATA / f"{name}{suffix}"


def need_fixture(name: str) -> Path:
    path = fixture_path(name)
    if not path.exists():
        pytest.skip(f"fixture {name}.tsp not available")
    return path


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def gr17() -> Instance:
    return load_instance(need_fixture("gr17"))


@pytest.fixture
def ulysses16() -> Instance:
    return load_instance(need_fixture("ulysses16"))


@pytest.fixture
def fig1_instance() -> Instance:
    """Fig-1 quadrilateral as an explicit instance (distances scaled by 10)."""
    m = np.zeros((4, 4), dtype=np.int64)
    for (a, b), d in {
        (0, 3): 20,
        (1, 2): 20,
        (0, 2): 40,
        (1, 3): 45,
        (0, 1): 60,
        (2, 3): 58,
    }.items():
        m[a, b] = m[b, a] = d
    return Instance(name="fig1", n=4, kind="EXPLICIT", matrix=m)


def load_opt_tour(name: str):
    inst = load_instance(need_fixture(name))
    tour_file = fixture_path(name, ".opt.tour")
    if not tour_file.exists():
        pytest.skip(f"fixture {name}.opt.tour not available")
    return inst, load_tour(tour_file, inst.n)

from pathlib import Path

import pytest

from clusteralloc.fitness import Request
from clusteralloc.inventory import Fleet, Node, load_fleet

DATA = Path(__file__).parent / "data"

LPC10_CAPACITIES = [80, 90, 100, 100, 90, 90, 50, 80, 50, 70]


def make_fleet(capacities):
    return Fleet(tuple(Node(i, c) for i, c in enumerate(capacities, start=1)))


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def lpc10():
    return load_fleet(DATA / "lpc10.csv")


@pytest.fixture
def request_532():
    return Request(3, (50, 30, 20), 5.0)

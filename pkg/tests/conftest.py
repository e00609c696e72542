from pathlib import Path

import numpy as np
import pytest

from kwgraph import hop2
from kwgraph.graph import WeightScheme, load_graph

DATA = Path(__file__).parent / "data"

BACKENDS = sorted(hop2.available_backends())


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def movie_paths():
    return DATA / "movie_nodes.tsv", DATA / "movie_edges.tsv"


@pytest.fixture(scope="session")
def movie(movie_paths):
    return load_graph(*movie_paths, WeightScheme("equal", 0.1))


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])

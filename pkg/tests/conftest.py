import numpy as np
import pytest
from hypothesis import settings

from qgzeta.io import parse_graph_file

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


@pytest.fixture(scope="session")
def k3():
    return parse_graph_file("k3_z2")


@pytest.fixture(scope="session")
def k3_s3():
    return parse_graph_file("k3_s3")


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def report(request):
    """Collects one pass/fail line per acceptance criterion."""
    return request.config.stash[ACCEPTANCE].append


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[ACCEPTANCE]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("]")[1].split()[0])):
            terminalreporter.write_line(line)

import random

import pytest

from ttdyn.seeds import orbit_graph, seed_track


@pytest.fixture(scope="session")
def seed05():
    return seed_track((0, 5))


@pytest.fixture(scope="session")
def seed20():
    return seed_track((2, 0))


@pytest.fixture(scope="session", params=[(0, 5), (2, 0)], ids=["0-5", "2-0"])
def seed(request):
    return seed_track(request.param)


@pytest.fixture(scope="session")
def graph05():
    """The (0,5) graph materialized along the shipped closed orbits."""
    return orbit_graph((0, 5))


@pytest.fixture
def rng():
    return random.Random(20240611)


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])

import random

import pytest

from treeshift.fixtures import full_shift, hand_built, tree


@pytest.fixture(scope="session")
def t2():
    return tree("full2")


@pytest.fixture(scope="session")
def tg():
    return tree("golden")


@pytest.fixture(scope="session")
def tu():
    return tree("upper")


@pytest.fixture(scope="session")
def shifts():
    return hand_built()


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def full_u():
    return full_shift("upper")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for res in sorted(RESULTS, key=lambda r: r.number):
        terminalreporter.write_line(res.line(timing=True))

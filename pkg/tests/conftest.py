import numpy as np
import pytest

from sparseopt.fixtures import ls5_model, q5_model
from sparseopt.optimality import enumerate_bf


@pytest.fixture(scope="session")
def q5():
    return q5_model()


@pytest.fixture(scope="session")
def ls5():
    return ls5_model()


@pytest.fixture(scope="session")
def q5_catalog(q5):
    return enumerate_bf(q5, 2)


@pytest.fixture(scope="session")
def ls5_catalog(ls5):
    return enumerate_bf(ls5, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one verdict line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

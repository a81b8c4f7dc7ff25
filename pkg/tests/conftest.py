import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sophlab.config import RunConfig
from sophlab.enumerator import EnumConfig, enumerate_domain
from sophlab.tables import Tables
from sophlab.verify import Lab


@pytest.fixture(scope="session")
def domain16():
    return enumerate_domain(EnumConfig(16, 4096))


@pytest.fixture(scope="session")
def tables16(domain16):
    return Tables(domain16)


@pytest.fixture(scope="session")
def lab16(domain16):
    return Lab(domain16, RunConfig(lmax=16))


@pytest.fixture(scope="session")
def domain12():
    return enumerate_domain(EnumConfig(12, 4096))


@pytest.fixture(scope="session")
def tables12(domain12):
    return Tables(domain12)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)

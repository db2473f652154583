import pytest

from stolarskyfv.config import merge
from stolarskyfv.reference import shoot_reference


def preset_problem(name):
    return merge({"preset": name}).problem()


@pytest.fixture(scope="session")
def example1():
    return preset_problem("example1")


@pytest.fixture(scope="session")
def example2():
    return preset_problem("example2")


@pytest.fixture(scope="session")
def ref1(example1):
    return shoot_reference(example1)


@pytest.fixture(scope="session")
def ref2(example2):
    return shoot_reference(example2)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

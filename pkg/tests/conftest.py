import functools

import pytest

from fusionqldpc.codes import named_code
from fusionqldpc.foliation import build_decoding_problem, foliate


@functools.lru_cache(maxsize=None)
def lattice_and_problem(name: str, T: int):
    lattice = foliate(named_code(name), T)
    return lattice, build_decoding_problem(lattice)


@pytest.fixture(scope="session")
def toric3():
    return lattice_and_problem("toric3", 3)


@pytest.fixture(scope="session")
def bb72_t2():
    return lattice_and_problem("bb72", 2)


@pytest.fixture(scope="session")
def bb72_t6():
    return lattice_and_problem("bb72", 6)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

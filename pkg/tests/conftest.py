import pytest

from wce.fock import verified_generators
from wce.rootdata import build_root_datum
from wce.twist import OperatorBank


@pytest.fixture(scope="session")
def a1():
    d = build_root_datum("A", 1)
    gens, _ = verified_generators(d, "builtin")
    return d, gens, OperatorBank(d, gens)


@pytest.fixture(scope="session")
def d4_report():
    d = build_root_datum("D", 4)
    gens, report = verified_generators(d, "builtin")
    return d, gens, report


@pytest.fixture(scope="session")
def d4(d4_report):
    d, gens, _ = d4_report
    return d, gens, OperatorBank(d, gens)


@pytest.fixture(scope="session")
def a2():
    d = build_root_datum("A", 2)
    gens, _ = verified_generators(d, "kernel_solve")
    return d, gens, OperatorBank(d, gens)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])

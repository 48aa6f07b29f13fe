from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from lcauto.lca import GeneratingPolynomial
from lcauto.presets import running_example, running_initial, thue_morse, toeplitz
from lcauto.substitution import subst_to_dfao
from lcauto.synthesis import kernel_closure, to_negp

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def running():
    return running_example()


@pytest.fixture(scope="session")
def running_dfao(running):
    return subst_to_dfao(running, 0)


@pytest.fixture(scope="session")
def tm_dfao():
    return subst_to_dfao(thue_morse(), 0)


@pytest.fixture(scope="session")
def toeplitz_dfao():
    return subst_to_dfao(toeplitz(), 0)


@pytest.fixture(scope="session")
def x_plus_1():
    return GeneratingPolynomial.parse("x+1", 3)


@pytest.fixture(scope="session")
def running_closure(x_plus_1):
    return kernel_closure(x_plus_1, running_initial(False))


@pytest.fixture(scope="session")
def running_negp(running_closure):
    return to_negp(running_closure)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from sbafnet.activation import ActivationSpec, Kind


@pytest.fixture
def spec():
    return ActivationSpec()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def sbaf_spec(alpha=0.5, k=1.0, eps=1e-6):
    return ActivationSpec(Kind.SBAF, k, alpha, eps)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

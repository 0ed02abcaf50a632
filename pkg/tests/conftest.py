import numpy as np
import pytest

from memrc.circuit import size_circuit
from memrc.memristor import MemristorState, build_model

# Component sizing anchor: R = 13.54 kOhm, R_N = 11.28 kOhm, L = 1.833 H.
G_MAX = 1.4771e-5
K = 5.0
C = 10e-9

# Reference drive period, seconds.
PERIOD = 1.134e-3

# Amplitudes spanning period-1 / period-multiplied / chaotic regimes for the
# default model (r = 465 kOhm, rho = 0.5), found by the bifurcation sweep.
U_PERIODIC = 0.05
U_CHAOTIC = 0.28


@pytest.fixture(scope="session")
def params():
    return size_circuit(G_MAX, K, C)


@pytest.fixture(scope="session")
def model465():
    return build_model(MemristorState(465e3), 0.5)


@pytest.fixture(scope="session")
def model_linear465():
    return build_model(MemristorState(465e3), 0.0)


# One line per acceptance criterion, echoed after the test summary so the
# verdicts survive pytest's output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

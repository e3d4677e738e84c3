"""Shared fixtures: full-length scenario runs are computed once per session."""
import numpy as np
import pytest
from scipy.optimize import brentq

from hygrotherm.fire import BoundaryParams, make_scenario
from hygrotherm.materials import sorption_pressure
from hygrotherm.solver import Problem, initial_state, simulate

THETA0 = 293.15
W0 = 71.01
ELL = 0.12

# lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def _run(kind, t_end, snapshots=(), probes=(ELL,)):
    sc = make_scenario(kind)
    pr = Problem(scenario=sc)
    series = simulate(pr, initial_state(pr.mesh, THETA0, W0), t_end,
                      snapshot_times=snapshots, probes=probes)
    return pr, series


@pytest.fixture(scope="session")
def iso_run():
    return _run("iso", 1800.0, snapshots=(900.0, 1800.0))


@pytest.fixture(scope="session")
def hc_run():
    return _run("hc", 1800.0, snapshots=(1800.0,))


@pytest.fixture(scope="session")
def pm_run():
    return _run("pm", 7200.0, snapshots=(7200.0,))


@pytest.fixture(scope="session")
def w_equilibrium():
    """Water content in vapour equilibrium with the ambient at 293.15 K."""
    p_inf = BoundaryParams().P_inf
    return brentq(lambda w: float(sorption_pressure(THETA0, w)) - p_inf, 1e-6, 100.0, xtol=1e-14)


def relative_drift(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))

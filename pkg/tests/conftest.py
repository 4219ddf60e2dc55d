import numpy as np
import pytest

from frictionlab.kernels import friction_kernel
from frictionlab.potentials import build_potential
from frictionlab.volterra import solve_K


@pytest.fixture(scope="session")
def ref_spec():
    return build_potential("gaussian", amplitude=1.0, width=1.0, kappa=1.0, mass=1.0)


@pytest.fixture(scope="session")
def sech_spec():
    return build_potential("exponential_radial", amplitude=1.0, width=1.0, kappa=1.0, mass=1.0)


@pytest.fixture(scope="session")
def weak_spec():
    return build_potential("gaussian", amplitude=1.0, width=1.0, kappa=0.3, mass=1.0)


@pytest.fixture(scope="session")
def ref_kernel(ref_spec):
    return friction_kernel(ref_spec, 0.01, 500.0)


@pytest.fixture(scope="session")
def ref_ktable(ref_kernel):
    return solve_K(ref_kernel)


def rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(b)))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

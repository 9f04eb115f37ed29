import math

import pytest

from issgain import (
    ClosedLoopConfig,
    build_problem,
    solve_inverse_kernel,
    solve_kernel,
    solve_spectrum,
    transport_problem,
)


@pytest.fixture(scope="session")
def laplacian_problem():
    return build_problem(1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 256)


@pytest.fixture(scope="session")
def laplacian_spectrum(laplacian_problem):
    return solve_spectrum(laplacian_problem, 12)


@pytest.fixture(scope="session")
def transport_case_problem():
    """Transport tube D = 1, v = 1, k = 0, Dirichlet exit (zeta = 0.5)."""
    return transport_problem(1.0, 1.0, 0.0, math.inf, resolution=256)


@pytest.fixture(scope="session")
def transport_case_spectrum(transport_case_problem):
    return solve_spectrum(transport_case_problem, 32)


@pytest.fixture(scope="session")
def kernels_lam5():
    cfg = ClosedLoopConfig(D=1.0, p=4.0, c=1.0)   # (p + c)/D = 5
    return solve_kernel(cfg, 256), solve_inverse_kernel(cfg, 256)

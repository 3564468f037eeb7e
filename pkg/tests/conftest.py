"""Session-scoped fixtures: each bundled scenario runs once and is shared
between the unit tests and the acceptance suite, with wall time recorded."""

import time

import numpy as np
import pytest

from nlslab import scenarios


def _timed_run(name):
    scn = scenarios.load_scenario(name)
    t0 = time.perf_counter()
    res = scenarios.run_scenario(scn)
    return res, time.perf_counter() - t0


@pytest.fixture(scope="session")
def free_gaussian_run():
    return _timed_run("free-gaussian")


@pytest.fixture(scope="session")
def repulsive_run():
    return _timed_run("repulsive")


@pytest.fixture(scope="session")
def confining_run():
    return _timed_run("confining")


@pytest.fixture(scope="session")
def confining_linear_run():
    return _timed_run("confining-linear")


@pytest.fixture(scope="session")
def confining_2d_run():
    return _timed_run("confining-2d")


@pytest.fixture(scope="session")
def decaying_run():
    return _timed_run("decaying-gamma3")


@pytest.fixture(scope="session")
def rate_run():
    return _timed_run("decaying-gamma3-rate")


@pytest.fixture(scope="session")
def rate_run_half():
    scn = scenarios.load_scenario("decaying-gamma3-rate").copy_with(**{
        "name": "decaying-gamma3-rate-half", "solver.dt": 5e-4})
    t0 = time.perf_counter()
    res = scenarios.run_scenario(scn)
    return res, time.perf_counter() - t0


@pytest.fixture(scope="session")
def lens_run():
    """Full lens-gamma3 scenario run (includes the frame comparison)."""
    return _timed_run("lens-gamma3")


@pytest.fixture(scope="session")
def far_pair():
    """gamma=3 fixed-point pair on a long horizon for the asymptotic fits."""
    from nlslab import lens, potentials

    om = potentials.omega_power_decay(1.0, 3.0)
    return lens.construct_scattering_pair(om, 3.0, 20.0, 1e4, tol=1e-13,
                                          cells=8192, h=0.05)


def loglog_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([np.log(x), np.ones_like(x)]).T
    return float(np.linalg.lstsq(A, np.log(y), rcond=None)[0][0])

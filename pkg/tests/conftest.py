"""Shared fixtures: the two benchmark maps with pipeline-chosen scales.

Heavy artifacts (orbit records, induced partitions) are built once per
session and shared across test modules.  Scale selection runs the same
delta ladder the command-line pipeline uses, so tests exercise partitions
at the exact parameters a user would get.
"""

import pytest

from cusp_induce import critical_orbit as co
from cusp_induce import hyperbolicity as hy
from cusp_induce import inducing as ind
from cusp_induce import map_model as mm
from cusp_induce.cli import _DELTA_LADDER


@pytest.fixture(scope="session")
def cheb():
    return mm.chebyshev_map()


@pytest.fixture(scope="session")
def lorenz():
    return mm.lorenz_map()


@pytest.fixture(scope="session")
def unimodal2():
    return mm.unimodal_map(a=2.0, ell=2.0)


@pytest.fixture(scope="session")
def singular():
    return mm.singular_unimodal_map()


@pytest.fixture(scope="session")
def cheb_records(cheb):
    return co.orbit_records(cheb, 200)


@pytest.fixture(scope="session")
def lorenz_records(lorenz):
    return co.orbit_records(lorenz, 200)


@pytest.fixture(scope="session")
def cheb_scales(cheb):
    delta, _ = hy.choose_delta(cheb, _DELTA_LADDER)
    c_hat, lambda_hat = hy.estimate_expansion(cheb, delta)
    return delta, hy.choose_q0(c_hat, lambda_hat)


@pytest.fixture(scope="session")
def lorenz_scales(lorenz):
    delta, _ = hy.choose_delta(lorenz, _DELTA_LADDER)
    c_hat, lambda_hat = hy.estimate_expansion(lorenz, delta)
    return delta, hy.choose_q0(c_hat, lambda_hat)


@pytest.fixture(scope="session")
def cheb_partition(cheb, cheb_scales):
    delta, q0 = cheb_scales
    return ind.build_partition(cheb, delta=delta, q0=q0)


@pytest.fixture(scope="session")
def lorenz_partition(lorenz, lorenz_scales):
    delta, q0 = lorenz_scales
    return ind.build_partition(lorenz, delta=delta, q0=q0)

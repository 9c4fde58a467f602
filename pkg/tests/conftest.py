import pytest

from zeta_apoints.apoint_cache import ApointCache, enumerate_into, write_cache
from zeta_apoints.zeta_kernel import TargetSpec

ZEROS = TargetSpec(0, 0)
ONE_POINTS = TargetSpec(1, 0)
DERIV_ZEROS = TargetSpec(0, 1)


@pytest.fixture(scope="session")
def tall_cache():
    """Zeros of zeta and zeta' up to 2000 and 1-points of zeta up to 400.

    Built once per session (about a minute); everything downstream of the
    engine reads from it.
    """
    cache = ApointCache()
    enumerate_into(cache, ZEROS, 2000.0)
    enumerate_into(cache, DERIV_ZEROS, 2000.0)
    enumerate_into(cache, ONE_POINTS, 400.0)
    return cache


@pytest.fixture(scope="session")
def tall_cache_path(tall_cache, tmp_path_factory):
    path = tmp_path_factory.mktemp("cache") / "apoints.csv"
    write_cache(tall_cache, path)
    return path

import pytest

from slopesize.critvals import CriticalValueCache

# one fixed seed for the whole suite so every Monte Carlo check is a
# deterministic rerun of the same draws
SUITE_SEED = 20260808


@pytest.fixture(scope="session")
def session_cache(tmp_path_factory) -> CriticalValueCache:
    """Critical-value cache shared across the whole test session."""
    return CriticalValueCache(tmp_path_factory.mktemp("critvals") / "cache.txt")

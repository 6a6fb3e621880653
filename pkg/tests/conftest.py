import pytest

from bidisc import construct_level


@pytest.fixture(scope="session")
def constructed():
    """Session cache of certified constructions keyed by (n, mode)."""
    cache = {}

    def get(n, mode="standard"):
        key = (n, mode)
        if key not in cache:
            cache[key] = construct_level(n, mode=mode)
        return cache[key]

    return get

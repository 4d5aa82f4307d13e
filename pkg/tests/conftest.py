import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def q():
    from pwlyap.algebra import as_rational

    return as_rational

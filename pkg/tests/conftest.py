import pytest
from hypothesis import settings

from sphere_toeplitz.quadrature import build_quadrature

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture(scope="session")
def rule():
    return build_quadrature(16)


@pytest.fixture(scope="session")
def rule24():
    return build_quadrature(24)

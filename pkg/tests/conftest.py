import warnings

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def quiet():
    """Silence the low-dimension warning for sanity cases."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield

import pytest

from uavcharge.energy import expected_profile
from uavcharge.params import default_config


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def profile(cfg):
    return expected_profile(cfg.net, cfg.energy)

import numpy as np
import pytest

from sanloc.experiments import default_config, default_scenario


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)

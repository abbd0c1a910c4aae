import pytest

from transwave.config import validated_default
from transwave.generator.operator import discretize


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long regime experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def cfg():
    return validated_default()


@pytest.fixture
def cfg_poly():
    return validated_default(a2=2.0)


@pytest.fixture
def coarse_gen(cfg):
    # 20 elements, 19 interior DOFs per chain
    return discretize(cfg, 0.1)

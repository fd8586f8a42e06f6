import os
import sys

import numpy as np
import pytest

project_root = os.path.dirname(os.path.abspath(__file__))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from platoonsim.core.domain import DdpgConfig, PlatoonConfig, RewardConfig, VelocityProfile  # noqa: E402

DEFAULT_ENV = os.path.join(project_root, "config", "default.env")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow end-to-end tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def platoon() -> PlatoonConfig:
    return PlatoonConfig()


@pytest.fixture
def platoon_no_delay() -> PlatoonConfig:
    return PlatoonConfig(v2v_delay=0.0)


@pytest.fixture
def reward_cfg(platoon) -> RewardConfig:
    return RewardConfig.for_platoon(platoon)


@pytest.fixture
def tiny_ddpg() -> DdpgConfig:
    """A few short episodes on a small network."""
    return DdpgConfig(
        buffer_capacity=1000, batch_size=4, episodes=3, episode_seconds=2.0,
        train_followers=2, hidden_units=8, log_every=1, seed=3,
    )


@pytest.fixture
def constant_profile():
    def make(v: float = 15.0, seconds: float = 20.0, dt: float = 0.2) -> VelocityProfile:
        return VelocityProfile(dt=dt, v=np.full(int(round(seconds / dt)) + 1, v))
    return make

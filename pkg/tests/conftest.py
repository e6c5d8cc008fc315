import numpy as np
import pytest

from src.core.config import reset_config
from src.core.distributions import GeneralDistribution
from src.core.game import GameInstance, MixedStrategy
from src.harness.generators import gen_dominant_instance, gen_random_instance, gen_single_follower_hard


@pytest.fixture
def g1():
    """One follower, two paired types, c=1, ε=0.2, σ=(+1): optimum 0.6"""
    return gen_single_follower_hard(1, 0.2, '+')


@pytest.fixture
def g2():
    """Every type has a strictly dominant action, so there is a single region"""
    return gen_dominant_instance(n=1, L=2, A=2, K=2, seed=0)


@pytest.fixture
def small_random():
    """Two followers, three leader actions, two actions, two types"""
    return gen_random_instance(n=2, L=3, A=2, K=2, seed=3)


@pytest.fixture
def constant_game():
    """Leader earns 0.5 whatever the followers do"""
    rng = np.random.default_rng(11)
    follower = rng.uniform(size=(1, 3, 2, 2))
    leader = np.full((2, 3), 0.5)
    return GameInstance.from_tables(leader, follower, GeneralDistribution([0.4, 0.6], n=1, K=2))


@pytest.fixture
def uniform_two():
    return MixedStrategy.uniform(2)


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """Keep env-driven settings from leaking between tests"""
    for key in ('LOG_LEVEL', 'THREADS', 'PROFILE_CAP', 'OFUL_CAP', 'REGION_SEEDS', 'RESULTS_DIR', 'LOG_DIR'):
        monkeypatch.delenv(key, raising=False)
    reset_config()
    yield
    reset_config()

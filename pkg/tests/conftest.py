import numpy as np
import pytest

from subsidy_bandit.core import make_instance
from subsidy_bandit.instances import make_fig1_example, make_table1


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fig1():
    return make_fig1_example(10_000, 0.1)


@pytest.fixture
def table03():
    return make_table1(0.3)


@pytest.fixture
def three_arm():
    return make_instance([0.5, 0.4, 0.3], [0.5, 0.4, 0.3], 0.1, "three")

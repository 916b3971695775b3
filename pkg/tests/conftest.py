# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
import sys
import pytest
import numpy as np
from spanbreaker import utils, adversarial


def pytest_addoption(parser):
    '''Add an option for running the full size experiments
    '''
    parser.addoption("--run-slow", action="store_true", dest='runslow',
                     default=False,
                     help="Run the slow (full size) experiment tests")


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: full size experiment, needs --run-slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption('runslow'):
        return
    skip = pytest.mark.skip(reason="needs --run-slow to run")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope='session', autouse=True)
def loglevel(request):
    level = max(40 - request.config.option.verbose * 10, 5)
    if sys.stdout.isatty():
        # enable console logging
        utils.log_to_stderr(level)

    return level


@pytest.fixture(scope='session', autouse=True)
def log(loglevel):
    return utils.log_to_stderr(loglevel)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope='session')
def chain():
    '''A chain instance with kappa = 16.
    '''
    return adversarial.nesterov_chain(16.0, 1.0, 40)


@pytest.fixture(scope='session')
def block():
    '''A small block instance (n = 32, kappa = 16).
    '''
    return adversarial.block_adversarial(32, 16.0, 1.0, 6)


@pytest.fixture(scope='session')
def ncvx():
    return adversarial.nonconvex_quadratic_sum(16, 6, 1.0, 8.0, 12.0, seed=3)


@pytest.fixture(scope='session')
def sdca8():
    return adversarial.sdca_adversarial(8, 2.0, 1.0)

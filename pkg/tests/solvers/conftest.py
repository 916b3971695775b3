"""
Solvers testing
"""
import pytest
from spanbreaker import solvers
from spanbreaker.harness import SupportTracker


@pytest.fixture
def tracker(block):
    '''A fresh support tracker on the shared block instance.
    '''
    return SupportTracker(block)


@pytest.fixture
def auto(block):
    '''Optimal SVRG settings for the block instance.
    '''
    return solvers.svrg_config(block, epochs=4, seed=7)

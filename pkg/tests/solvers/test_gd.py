# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
'''
Full gradient descent
'''
import numpy as np
import pytest
from spanbreaker import solvers, utils
from spanbreaker.solvers import SolverConfig


def test_zero_step_is_constant(block):
    trace = solvers.gradient_descent(block, 0.0, 3)
    values = trace.suboptimality
    assert np.all(values == values[0])
    assert trace.grad_units.tolist() == [0, block.n, 2 * block.n,
                                         3 * block.n]


def test_monotone_decrease(chain):
    trace = solvers.gradient_descent(chain, None, 50)
    values = trace.suboptimality
    assert np.all(np.diff(values) <= 0)
    assert values[-1] < values[0]


def test_support_grows_one_per_step(block, tracker):
    solvers.gradient_descent(block, None, 4, callback=tracker)
    assert not tracker.violated
    assert tracker.draws.tolist() == [4] * block.n


def test_negative_step(chain):
    with pytest.raises(utils.InvalidArgument):
        solvers.gradient_descent(chain, -1.0, 3)


def test_registry_entry_budget(block):
    run = solvers.get('gd')
    trace = run(block, SolverConfig(epochs=10, grad_units=3 * block.n + 1))
    assert not trace.complete
    assert trace.grad_units[-1] == 3 * block.n


def test_early_stop(chain):
    trace = solvers.gradient_descent(chain, None, 500, tol=1e-3)
    assert len(trace) < 501
    assert trace.suboptimality[-1] <= 1e-3 * trace.suboptimality[0]


def test_snapshot_callbacks(chain):
    steps = []
    solvers.gradient_descent(chain, None, 3, callback=steps.append)
    assert [s.iteration for s in steps] == [1, 2, 3]
    assert all(s.indices is None for s in steps)

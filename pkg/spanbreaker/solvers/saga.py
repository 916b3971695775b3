# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
SAGA, the table based baseline that obeys the span condition.
"""
import numpy as np

from .. import utils
from ..core import prox_psi, effective_lipschitz
from ..utils import InvalidArgument, BudgetExhausted
from . import solver, Step, start_point, new_trace

log = utils.get_logger(__name__)

TABLE_INITS = ('zeros', 'full')


class GradientTable(object):
    """Last seen local gradient of every component plus their running mean
    (scattered back into the full dimension).

    Only the block part of each gradient is stored; the shared ridge term is
    applied exactly by the caller.
    """
    def __init__(self, problem, x, fill=False, meter=None):
        self.problem = problem
        n = problem.n
        width = np.zeros(problem.d)[problem.block(0)].shape[0]
        self.rows = np.zeros((n, width))
        self.mean = np.zeros(problem.d)
        if fill:
            if meter is not None:
                meter.charge(n)
            for j in range(n):
                g = problem.local_grad(j, x)
                self.rows[j] = g
                self.mean[problem.block(j)] += g / n

    def swap(self, j, g):
        """Store `g` for component `j` and return ``g - old``.
        """
        delta = g - self.rows[j]
        self.mean[self.problem.block(j)] += delta / self.problem.n
        self.rows[j] = g
        return delta


@solver('saga')
def saga(problem, config, x0=None, meter=None, callback=None):
    '''SAGA with optional importance sampling.

    An epoch is ``n`` steps of one unit each. A point is recorded every
    ``config.record_every`` steps (default ``n``); the trace ``epoch``
    column counts records.

    :param config: `SolverConfig`; ``eta`` defaults to ``1 / (3 L_Q)`` and
        ``table_init`` is ``'zeros'`` (span preserving) or ``'full'``
        (evaluate the table at ``x0`` for ``n`` units)
    '''
    config = config.validate(problem)
    if config.table_init not in TABLE_INITS:
        raise InvalidArgument("table_init must be one of {}, got '{}'"
                              .format(TABLE_INITS, config.table_init))
    P = config.distribution(problem)
    n = problem.n
    eta = config.eta
    if eta is None:
        eta = 1.0 / (3.0 * effective_lipschitz(problem, P))
        config = config._replace(eta=eta)
    record_every = config.record_every or n
    meter = meter if meter is not None else config.meter()
    rng = np.random.default_rng(config.seed)

    x = start_point(problem, x0)
    trace = new_trace('saga', problem, config)
    try:
        table = GradientTable(problem, x, fill=config.table_init == 'full',
                              meter=meter)
    except BudgetExhausted as err:
        log.info("saga could not fill its table: {}".format(err))
        trace.complete = False
        trace.record_point(problem, x, meter.units, 0)
        return trace.finish(x)

    initial = trace.record_point(problem, x, meter.units, 0)
    ridge = problem.ridge
    weights = 1.0 / (n * np.asarray(P))
    steps = config.epochs * n
    records = 0
    try:
        for t, j in enumerate(P.draw(rng, steps)):
            meter.charge(1)
            g = problem.local_grad(j, x)
            direction = table.mean + ridge * x if ridge else table.mean.copy()
            blk = problem.block(j)
            # importance weighted correction before the table moves
            direction[blk] += weights[j] * (g - table.rows[j])
            table.swap(j, g)
            x = prox_psi(problem, eta, x - eta * direction)
            if callback:
                callback(Step(t + 1, t // n, (int(j),), x))
            if (t + 1) % record_every == 0:
                records += 1
                value = trace.record_point(problem, x, meter.units, records)
                if (config.tol is not None and value is not None and
                        initial and value <= config.tol * initial):
                    break
    except BudgetExhausted as err:
        log.info("saga stopped early: {}".format(err))
        trace.complete = False
    log.debug("saga finished after {} units".format(meter.units))
    return trace.finish(x)

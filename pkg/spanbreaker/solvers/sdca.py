# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
Stochastic dual coordinate ascent for squared losses.
"""
import numpy as np

from .. import utils
from ..core import GradientMeter, dist_sq
from ..utils import InvalidArgument, UnsupportedFeature, BudgetExhausted
from . import solver, SolverConfig, Step, new_trace

log = utils.get_logger(__name__)


class DualState(object):
    """Dual vector ``alpha`` and the primal point
    ``x = (1 / (lambda n)) sum_i alpha_i y_i`` kept in sync with it.
    """
    rtol = 1e-10

    def __init__(self, instance, alpha):
        alpha = utils.as_vector(alpha, instance.n, 'alpha0').copy()
        self.instance = instance
        self.alpha = alpha
        self.x = instance.primal(alpha)

    def drift(self):
        """Relative distance between ``x`` and its definition from alpha.
        """
        exact = self.instance.primal(self.alpha)
        scale = max(1.0, float(np.linalg.norm(exact)))
        return float(np.linalg.norm(self.x - exact)) / scale

    def check(self):
        """Resynchronize ``x`` if it drifted more than `rtol`.
        """
        drift = self.drift()
        if drift > self.rtol:
            log.warning("primal drift {:g} exceeds {:g}; resyncing"
                        .format(drift, self.rtol))
            self.x = self.instance.primal(self.alpha)
        return drift


def sdca_step(instance, alpha, x, i):
    """Exactly minimize the dual over coordinate `i`, updating `alpha` and
    `x` in place. Returns the new ``alpha_i``.
    """
    lam_n = instance.lam * instance.n
    s = instance.col_sq_norm / lam_n
    old = alpha[i]
    z = (old * s - instance.dot_column(i, x)) / (1.0 + s)
    x += ((z - old) / lam_n) * instance.column(i)
    alpha[i] = z
    return z


def _initial_alpha(instance, alpha0):
    if alpha0 is None:
        return np.ones(instance.n)
    if isinstance(alpha0, str):
        if alpha0 == 'ones':
            return np.ones(instance.n)
        if alpha0 == 'zeros':
            return np.zeros(instance.n)
        raise InvalidArgument("unknown alpha0 '{}'".format(alpha0))
    return alpha0


def sdca(instance, alpha0=None, iters=None, seed=0, record_every=1,
         meter=None, callback=None):
    '''Run `iters` uniformly sampled coordinate steps (default ``4 n``).

    The trace records ``||x||^2`` as ``dist_sq``, ``F(x) - F(0)`` as
    suboptimality and the dual objective on each point.

    :param instance: `spanbreaker.adversarial.SdcaInstance`
    :param alpha0: start vector, or ``'ones'`` (default) / ``'zeros'``
    '''
    if getattr(instance, 'loss', None) != 'squared':
        raise UnsupportedFeature(
            "sdca supports squared losses only, got '{}'"
            .format(getattr(instance, 'loss', None)))
    n = instance.n
    iters = 4 * n if iters is None else int(iters)
    if iters < 0:
        raise InvalidArgument("iters must be >= 0")
    record_every = int(record_every)
    if record_every < 1:
        raise InvalidArgument("record_every must be >= 1")
    meter = meter if meter is not None else GradientMeter()
    problem = instance.problem()
    state = DualState(instance, _initial_alpha(instance, alpha0))
    config = SolverConfig(epochs=max(1, iters), seed=seed,
                          record_every=record_every)
    trace = new_trace('sdca', problem, config,
                      alpha0=state.alpha.tolist())
    rng = np.random.default_rng(seed)

    def record(count):
        trace.record_point(problem, state.x, meter.units, count,
                           dual=instance.dual_objective(state.alpha))

    record(0)
    try:
        for k, i in enumerate(rng.integers(n, size=iters)):
            meter.charge(1)
            sdca_step(instance, state.alpha, state.x, i)
            if callback:
                callback(Step(k + 1, k // n, (int(i),), state.x))
            if (k + 1) % n == 0:
                state.check()
            if (k + 1) % record_every == 0:
                record((k + 1) // record_every)
    except BudgetExhausted as err:
        log.info("sdca stopped early: {}".format(err))
        trace.complete = False
    log.debug("sdca: ||x||^2 = {}".format(dist_sq(problem, state.x)))
    trace.alpha = state.alpha
    return trace.finish(state.x)


@solver('sdca')
def run_sdca(instance, config, x0=None, meter=None, callback=None):
    """Registry entry. ``config.epochs`` counts blocks of ``n`` coordinate
    steps and ``x0`` is ignored (the start is set by ``config.alpha0``).
    """
    if meter is None and config.grad_units is not None:
        meter = config.meter()
    return sdca(instance, config.alpha0, config.epochs * instance.n,
                seed=config.seed, record_every=config.record_every or 1,
                meter=meter, callback=callback)

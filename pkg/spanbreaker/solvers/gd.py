# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
Full (proximal) gradient descent.
"""
from .. import utils
from ..core import prox_psi, full_grad, GradientMeter
from ..utils import InvalidArgument, BudgetExhausted
from . import solver, SolverConfig, Step, start_point, new_trace

log = utils.get_logger(__name__)


def gradient_descent(problem, eta, iters, x0=None, meter=None,
                     callback=None, seed=0, tol=None):
    '''Run ``x <- prox(eta, x - eta grad f(x))`` for `iters` steps.

    Every step costs ``n`` units and counts as a draw of every component.
    A zero step size is allowed and leaves the iterate fixed.
    '''
    if eta is None:
        eta = 1.0 / problem.L
    if not eta >= 0:
        raise InvalidArgument("eta must be >= 0, got {}".format(eta))
    if int(iters) != iters or iters < 0:
        raise InvalidArgument("iters must be a non-negative integer")
    meter = meter if meter is not None else GradientMeter()
    config = SolverConfig(eta=eta, epochs=max(1, int(iters)), seed=seed,
                          tol=tol)
    trace = new_trace('gd', problem, config)
    x = start_point(problem, x0)
    initial = trace.record_point(problem, x, meter.units, 0)
    try:
        for k in range(int(iters)):
            g = full_grad(problem, x, meter)
            if eta:
                x = prox_psi(problem, eta, x - eta * g)
            if callback:
                callback(Step(k + 1, k, None, x))
            value = trace.record_point(problem, x, meter.units, k + 1)
            if (tol is not None and value is not None and initial and
                    value <= tol * initial):
                break
    except BudgetExhausted as err:
        log.info("gd stopped early: {}".format(err))
        trace.complete = False
    return trace.finish(x)


@solver('gd')
def run_gd(problem, config, x0=None, meter=None, callback=None):
    """Registry entry: one epoch is one full gradient step.
    """
    if meter is None and config.grad_units is not None:
        meter = config.meter()
    return gradient_descent(
        problem, config.eta, config.epochs, x0=x0, meter=meter,
        callback=callback, seed=config.seed, tol=config.tol)

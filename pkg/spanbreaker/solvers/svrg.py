# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
Hybrid methods: Prox-SVRG with geometric epochs, SARAH and their
parameter selectors.
"""
import math
from collections import namedtuple

import numpy as np

from .. import utils
from ..core import (
    prox_psi, effective_lipschitz, kappa_q, lbar,
    nonconvex_importance_distribution,
)
from ..utils import InvalidArgument, UnsupportedFeature, BudgetExhausted
from . import (
    solver, SolverConfig, Step, sample_epoch_length, start_point, new_trace,
    epochs_log,
)

log = utils.get_logger(__name__)


def optimal_svrg_params(n, kappa_Q, L_Q):
    """Return ``(m, eta)`` with ``m = n + 121 kappa_Q`` and
    ``eta = sqrt(kappa_Q / m) / (2 L_Q)``.

    The step always satisfies ``eta <= 1 / (22 L_Q)``.
    """
    if n < 0:
        raise InvalidArgument("n must be >= 0, got {}".format(n))
    kappa_Q = utils.positive('kappa_Q', kappa_Q)
    L_Q = utils.positive('L_Q', L_Q)
    m = n + 121.0 * kappa_Q
    eta = math.sqrt(kappa_Q / m) / (2.0 * L_Q)
    return m, eta


def theorem1_rate(mu, eta, m, L_Q):
    '''Per epoch contraction factor guaranteed for geometric epochs:

        rho = (1 + mu eta (1 + 4 m L_Q eta)) / (mu eta m (1 - 4 L_Q eta))

    :raises InvalidArgument: if ``eta >= 1 / (4 L_Q)``
    '''
    mu = utils.positive('mu', mu)
    eta = utils.positive('eta', eta)
    m = utils.positive('m', m)
    L_Q = utils.positive('L_Q', L_Q)
    if 4.0 * L_Q * eta >= 1.0:
        raise InvalidArgument(
            "rate undefined for eta={} >= 1/(4 L_Q)={}"
            .format(eta, 0.25 / L_Q))
    num = 1.0 + mu * eta * (1.0 + 4.0 * m * L_Q * eta)
    return num / (mu * eta * m * (1.0 - 4.0 * L_Q * eta))


def rate_bound(n, kappa_Q):
    """``sqrt(100 / (121 + n / kappa_Q))``
    """
    kappa_Q = utils.positive('kappa_Q', kappa_Q)
    return math.sqrt(100.0 / (121.0 + n / kappa_Q))


def predicted_epochs(n, kappa_Q, gap_ratio):
    """Epochs needed to shrink the suboptimality by `gap_ratio` (< 1) at the
    ``sqrt(m / kappa_Q) / 10`` per epoch reduction of the optimal
    parameters.
    """
    kappa_Q = utils.positive('kappa_Q', kappa_Q)
    gap_ratio = utils.positive('gap_ratio', gap_ratio)
    if gap_ratio >= 1:
        return 0
    m = n + 121.0 * kappa_Q
    return int(math.ceil(
        math.log(gap_ratio) / -math.log(math.sqrt(m / kappa_Q) / 10.0)))


def predicted_grad_units(n, kappa_Q, gap_ratio):
    m = n + 121.0 * kappa_Q
    return (n + m) * predicted_epochs(n, kappa_Q, gap_ratio)


def _check_bound_args(n, kappa, eps):
    utils.positive('n', n)
    utils.positive('kappa', kappa)
    eps = utils.positive('eps', eps)
    if eps >= 1:
        raise InvalidArgument("eps must be below 1, got {}".format(eps))


def lower_complexity_bound(n, kappa, eps):
    """Gradient units any finite-sum method needs on its worst instance,
    without the hidden constant:
    ``n + (n / (1 + (ln(n / kappa))_+) + sqrt(n kappa)) ln(1 / eps)``.

    `predicted_grad_units` matches it up to a constant when
    ``kappa = O(n)``.
    """
    _check_bound_args(n, kappa, eps)
    speedup = 1.0 + max(0.0, math.log(n / kappa))
    return n + (n / speedup + math.sqrt(n * kappa)) * math.log(1.0 / eps)


def span_lower_bound(n, kappa, eps):
    """The same for methods whose iterates stay in the span of the sampled
    component gradients: ``(n + sqrt(n kappa)) ln(1 / eps)``.
    """
    _check_bound_args(n, kappa, eps)
    return (n + math.sqrt(n * kappa)) * math.log(1.0 / eps)


NonconvexParams = namedtuple('NonconvexParams', 'eta tau rho')


def nonconvex_svrg_params(n, L, lbar, mu, m=None):
    """Step size for components that may be individually nonconvex:
    ``eta = min(1 / L, 1 / (lbar sqrt(m))) / 2`` along with
    ``tau = m eta mu / 2`` and the rate ``rho = 1 / (1 + tau)``.

    `m` defaults to `n`.
    """
    L = utils.positive('L', L)
    lbar = utils.positive('lbar', lbar)
    mu = utils.positive('mu', mu)
    m = utils.positive('m', n if m is None else m)
    eta = 0.5 * min(1.0 / L, 1.0 / (lbar * math.sqrt(m)))
    tau = 0.5 * m * eta * mu
    return NonconvexParams(eta, tau, 1.0 / (1.0 + tau))


def nonconvex_complexity(n, kappa, lbar, mu, eps):
    """Gradient complexity (up to constants) of SVRG with nonconvex
    components to reach accuracy `eps`.
    """
    for name, value in (('kappa', kappa), ('lbar', lbar), ('mu', mu),
                        ('eps', eps), ('n', n)):
        utils.positive(name, value)
    per_eps = (
        n / math.log1p(n / (4.0 * kappa)) +
        n / math.log1p(math.sqrt(n * mu * mu / (4.0 * lbar * lbar))) +
        kappa + math.sqrt(n) * lbar / mu
    )
    return per_eps * math.log(1.0 / eps) + 2 * n


# historical (step factor * 1/L_Q, epoch factor * kappa_Q) choices
PRESETS = {
    'johnson_zhang': (0.1, 50.0),
    'xiao_zhang': (0.1, 100.0),
    'sarah_paper': (0.5, 4.5),
}


def svrg_config(problem, P=None, **kwargs):
    """`SolverConfig` with the optimal ``(m, eta)`` for `problem` and `P`.
    """
    P = P if P is not None else problem.uniform()
    m, eta = optimal_svrg_params(
        problem.n, kappa_q(problem, P), effective_lipschitz(problem, P))
    return SolverConfig(eta=eta, m=m, P=P, **kwargs)


SolverConfig.auto = classmethod(
    lambda cls, problem, P=None, **kwargs: svrg_config(problem, P, **kwargs))


def nonconvex_config(problem, m=None, P=None, **kwargs):
    """`SolverConfig` for possibly nonconvex components; samples with
    ``p_i ~ L_i^2`` unless `P` is given and uses ``m = n`` by default.
    """
    P = P if P is not None else nonconvex_importance_distribution(problem)
    m = problem.n if m is None else m
    params = nonconvex_svrg_params(
        problem.n, problem.L, lbar(problem, P), problem.mu, m)
    log.debug("nonconvex parameters for '{}': {}"
              .format(problem.name, params))
    return SolverConfig(eta=params.eta, m=m, P=P, **kwargs)


def preset_config(name, problem, P=None, **kwargs):
    try:
        step, length = PRESETS[name]
    except KeyError:
        raise InvalidArgument("unknown preset '{}', choose from {}"
                              .format(name, sorted(PRESETS)))
    P = P if P is not None else problem.uniform()
    L_Q = effective_lipschitz(problem, P)
    m = max(1.0, length * L_Q / problem.mu)
    return SolverConfig(eta=step / L_Q, m=m, P=P, **kwargs)


def svrg_estimator(problem, P, i, w, w0, snapshot):
    """Variance reduced gradient estimate
    ``snapshot + (grad f_i(w) - grad f_i(w0)) / (n p_i)``.
    """
    scale = 1.0 / (problem.n * P[i])
    if problem.ridge:
        est = snapshot + (problem.ridge * scale) * (w - w0)
    else:
        est = snapshot.copy()
    est[problem.block(i)] += scale * (
        problem.local_grad(i, w) - problem.local_grad(i, w0))
    return est


def _resolve(problem, config):
    """Fill in the optimal parameters for anything left unset.
    """
    config = config.validate(problem)
    if config.eta is None or config.m is None:
        m, eta = optimal_svrg_params(
            problem.n, kappa_q(problem, config.distribution(problem)),
            effective_lipschitz(problem, config.distribution(problem)))
        config = config._replace(
            eta=config.eta if config.eta is not None else eta,
            m=config.m if config.m is not None else m,
        )
    L_Q = effective_lipschitz(problem, config.distribution(problem))
    if 4.0 * L_Q * config.eta >= 1.0:
        log.warning("eta={} is outside the region 1/(4 L_Q)={} covered by "
                    "the rate guarantee".format(config.eta, 0.25 / L_Q))
    return config


class _Run(object):
    """Bookkeeping shared by the hybrid methods.
    """
    def __init__(self, name, problem, config, x0, meter):
        self.problem = problem
        self.config = config
        self.meter = meter if meter is not None else config.meter()
        self.x = start_point(problem, x0)
        self.trace = new_trace(name, problem, config)
        self.initial = self.trace.record_point(problem, self.x,
                                               self.meter.units, 0)
        self.rng = np.random.default_rng(config.seed)
        self.iteration = 0
        self.stopped = False

    def converged(self, value):
        tol = self.config.tol
        if tol is None or value is None or self.initial is None:
            return False
        return value <= tol * self.initial

    def record(self, x, epoch):
        """Record `x` unless the meter has not moved since the last point.
        """
        last = self.trace.final
        if last is not None and last.grad_units == self.meter.units:
            return last.suboptimality
        return self.trace.record_point(self.problem, x, self.meter.units,
                                       epoch)

    def inner_point(self, k, w):
        """Record the inner iterate of epoch `k` every
        ``config.record_every`` updates. True once it meets ``tol``.
        """
        every = self.config.record_every
        if every is None or self.iteration % every:
            return False
        self.stopped = self.converged(self.record(w, k + 1))
        return self.stopped

    def finish(self):
        return self.trace.finish(self.x)


def _epochs(run, name, inner):
    """Drive `inner(run, k, trips)` for each epoch and record the result.
    """
    config = run.config
    epochs = config.epochs
    try:
        for k in range(epochs):
            trips = sample_epoch_length(run.rng, config.m, config.epoch_mode)
            epochs_log.debug("{} epoch {}: M={}".format(name, k, trips - 1))
            run.x = inner(run, k, trips)
            value = run.record(run.x, k + 1)
            log.debug("{} epoch {}: {} units, suboptimality {}".format(
                name, k + 1, run.meter.units, value))
            if run.stopped or run.converged(value):
                break
    except BudgetExhausted as err:
        log.info("{} stopped early: {}".format(name, err))
        run.trace.complete = False
    return run.finish()


@solver('svrg')
def prox_svrg(problem, config, x0=None, meter=None, callback=None):
    '''Prox-SVRG with geometrically distributed epoch lengths.

    Each epoch charges ``n`` units for the snapshot and one unit per inner
    step. The iterate only moves to the inner point once an epoch
    completes, so a budget hit mid epoch leaves ``x^k`` untouched.

    With ``config.record_every`` the inner iterate is also recorded every
    that many updates, labelled with the epoch in progress; the last point
    of each label is still the epoch end.

    :param problem: `FiniteSumProblem`
    :param config: `SolverConfig`; unset ``eta`` or ``m`` take their
        optimal values
    :param callback: called with a `Step` after every inner update
    '''
    config = _resolve(problem, config)
    run = _Run('svrg', problem, config, x0, meter)
    P = config.distribution(problem)
    eta = config.eta

    def inner(run, k, trips):
        run.meter.charge(problem.n)
        w0 = run.x
        snapshot = problem.gradient(w0)
        w = w0
        for i in P.draw(run.rng, trips):
            run.meter.charge(1)
            est = svrg_estimator(problem, P, i, w, w0, snapshot)
            w = prox_psi(problem, eta, w - eta * est)
            run.iteration += 1
            if callback:
                callback(Step(run.iteration, k, (int(i),), w))
            if run.inner_point(k, w):
                break
        return w

    return _epochs(run, 'svrg', inner)


@solver('sarah')
def sarah(problem, config, x0=None, meter=None, callback=None):
    '''SARAH: recursive estimator
    ``v_t = (grad f_i(w_t) - grad f_i(w_{t-1})) / (n p_i) + v_{t-1}``
    started from the epoch snapshot. Uses the same defaults and epoch
    convention as `prox_svrg`; only smooth problems are supported.
    '''
    if not problem.psi.is_none:
        raise UnsupportedFeature("sarah does not support a regularizer")
    config = _resolve(problem, config)
    run = _Run('sarah', problem, config, x0, meter)
    P = config.distribution(problem)
    eta = config.eta
    n = problem.n

    def inner(run, k, trips):
        run.meter.charge(n)
        w_prev = run.x
        v = problem.gradient(w_prev)
        w = w_prev - eta * v
        run.iteration += 1
        if callback:
            callback(Step(run.iteration, k, None, w))
        for i in P.draw(run.rng, trips - 1):
            run.meter.charge(1)
            v = svrg_estimator(problem, P, i, w, w_prev, v)
            w_prev, w = w, w - eta * v
            run.iteration += 1
            if callback:
                callback(Step(run.iteration, k, (int(i),), w))
            if run.inner_point(k, w):
                break
        return w

    return _epochs(run, 'sarah', inner)

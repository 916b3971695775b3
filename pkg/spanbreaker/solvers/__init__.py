# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
'''
Built-in solvers.

Every registered solver is called as ``run(problem, config, x0=None,
meter=None, callback=None)`` and returns a `spanbreaker.measure.Trace`.
'''
from collections import OrderedDict, namedtuple
import itertools

import numpy as np

from .. import utils
from ..core import SamplingDistribution, GradientMeter
from ..measure import Trace
from ..utils import InvalidArgument

log = utils.get_logger(__name__)
# sampled epoch lengths go here; silenced unless ``--debug-epochs``
epochs_log = utils.get_logger('epochs')

# registry
_solvers = OrderedDict()


def solver(*args, **kwargs):
    '''Decorator to register solver entry points.

    Example usage:

    .. code-block:: python

        @solver
        def my_method(problem, config, x0=None, meter=None, callback=None):
            ...

        # or with an alternative name
        @solver('fancy')
        def my_method(problem, config, **kwargs):
            ...
    '''
    name = kwargs.get('name')
    if len(args) >= 1:
        arg0 = args[0]
        if callable(arg0):
            return register(arg0, None)
        name = arg0

    def inner(func):
        return register(func, name=name)
    return inner


def register(func, name=None):
    """Register a solver in the global registry
    """
    name = name or func.__name__
    registered = _solvers.setdefault(name, func)
    if func is not registered:
        raise ValueError("A solver '{}' already exists with name '{}'"
                         .format(registered, name))
    return func


def iter_solvers():
    """Iterable over all registered (name, solver) pairs.
    """
    return itertools.chain(_solvers.items())


def get(name):
    """Get a registered solver by name or None if one isn't registered.
    """
    return _solvers.get(name)


EPOCH_MODES = ('geometric', 'fixed')

_Config = namedtuple(
    'SolverConfig',
    'eta m epochs P epoch_mode seed grad_units tol table_init record_every '
    'alpha0'
)


class SolverConfig(_Config):
    """Immutable solver settings.

    ``eta``
        step size (None lets the solver pick its default)
    ``m``
        expected inner loop length of the hybrid methods
    ``epochs``
        number of epochs ``K`` (``n`` steps for SAGA/SDCA, one step for GD)
    ``P``
        `SamplingDistribution` (None means uniform)
    ``grad_units``
        optional budget cap in gradient units
    ``tol``
        optional early stop once ``F - F*`` drops below ``tol`` times its
        initial value
    ``record_every``
        record a point every that many updates (SAGA, SDCA and the inner
        loops of SVRG/SARAH)
    """
    __slots__ = ()

    def __new__(cls, eta=None, m=None, epochs=10, P=None,
                epoch_mode='geometric', seed=0, grad_units=None, tol=None,
                table_init='zeros', record_every=None, alpha0='ones'):
        return super(SolverConfig, cls).__new__(
            cls, eta, m, epochs, P, epoch_mode, seed, grad_units, tol,
            table_init, record_every, alpha0)

    def validate(self, problem):
        if self.eta is not None and not self.eta > 0:
            raise InvalidArgument(
                "step size must be positive, got {}".format(self.eta))
        if self.m is not None and not self.m >= 1:
            raise InvalidArgument("m must be >= 1, got {}".format(self.m))
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise InvalidArgument(
                "epochs must be a positive integer, got {}"
                .format(self.epochs))
        if self.epoch_mode not in EPOCH_MODES:
            raise InvalidArgument(
                "epoch_mode must be one of {}, got '{}'"
                .format(EPOCH_MODES, self.epoch_mode))
        if self.P is not None and len(self.P) != problem.n:
            raise InvalidArgument(
                "distribution has {} entries for n={}"
                .format(len(self.P), problem.n))
        if self.record_every is not None and self.record_every < 1:
            raise InvalidArgument("record_every must be >= 1")
        return self

    def distribution(self, problem):
        return self.P if self.P is not None else problem.uniform()

    def meter(self):
        return GradientMeter(self.grad_units)

    def describe(self):
        """Json friendly echo of the settings.
        """
        desc = self._asdict()
        desc['P'] = self.P.describe() if self.P is not None else 'uniform'
        return desc


SvrgConfig = SolverConfig

Step = namedtuple('Step', 'iteration epoch indices x')
Step.__doc__ = """Update notification passed to solver callbacks.

``indices`` holds the component indices drawn for this update or None when
the update used a full gradient.
"""


def sample_epoch_length(rng, m, mode='geometric'):
    """Number of inner steps of one epoch.

    In geometric mode ``M ~ Geom(1/m)`` on ``{0, 1, 2, ...}`` is drawn as
    ``floor(ln(U) / ln(1 - 1/m))`` with ``U`` uniform on ``(0, 1]`` and the
    loop runs ``M + 1`` times, so the expected trip count is ``m``.
    """
    if mode == 'fixed':
        return max(1, int(round(m)))
    if mode != 'geometric':
        raise InvalidArgument("unknown epoch mode '{}'".format(mode))
    if m <= 1:
        return 1
    u = 1.0 - rng.random()
    return int(np.floor(np.log(u) / np.log1p(-1.0 / m))) + 1


def start_point(problem, x0):
    if x0 is None:
        return np.zeros(problem.d)
    return utils.as_vector(x0, problem.d, 'x0').copy()


def new_trace(name, problem, config, **meta):
    """Create a `Trace` whose meta data is enough to re-run it.
    """
    meta.update(solver=name, seed=config.seed, config=config.describe(),
                instance=problem.describe())
    return Trace(meta)


from .svrg import (  # noqa
    prox_svrg, sarah, optimal_svrg_params, theorem1_rate, rate_bound,
    predicted_epochs, predicted_grad_units, lower_complexity_bound,
    span_lower_bound, nonconvex_svrg_params,
    nonconvex_complexity, svrg_estimator, svrg_config, nonconvex_config,
    preset_config, PRESETS,
)
from .saga import saga  # noqa
from .gd import gradient_descent  # noqa
from .sdca import sdca, sdca_step, DualState  # noqa

__all__ = [
    'solver', 'register', 'get', 'iter_solvers', 'SolverConfig',
    'SvrgConfig', 'Step', 'SamplingDistribution', 'sample_epoch_length',
    'prox_svrg', 'sarah', 'saga', 'gradient_descent', 'sdca', 'sdca_step',
    'DualState', 'optimal_svrg_params', 'theorem1_rate', 'rate_bound',
    'predicted_epochs', 'predicted_grad_units', 'lower_complexity_bound',
    'span_lower_bound', 'nonconvex_svrg_params',
    'nonconvex_complexity', 'svrg_estimator', 'svrg_config',
    'nonconvex_config', 'preset_config', 'PRESETS',
]

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
Convergence traces and the measurements taken from them.
"""
import math
from collections import namedtuple

import numpy as np

from .. import utils
from ..core import suboptimality, dist_sq
from ..utils import InvalidArgument, InsufficientData
from .storage import CSVStore, TRACE_FIELDS  # noqa

log = utils.get_logger(__name__)

TracePoint = namedtuple(
    'TracePoint', 'grad_units epoch suboptimality dist_sq dual')
TracePoint.__new__.__defaults__ = (None, None, None)

# reported suboptimality may dip below zero by rounding only
NEGATIVE_SLACK = 1e-12


class Trace(object):
    """Recorded progress of one solver run.

    ``points`` is a list of `TracePoint`; ``meta`` holds the solver name,
    the config echo, the seed and the instance descriptor; ``complete`` is
    False when a budget cap cut the run short. ``x`` is the final iterate.
    """
    def __init__(self, meta=None):
        self.points = []
        self.meta = dict(meta or {})
        self.complete = True
        self.x = None

    def __repr__(self):
        return '<{} {} points={} complete={}>'.format(
            type(self).__name__, self.meta.get('solver'), len(self),
            self.complete)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index):
        return self.points[index]

    @property
    def key(self):
        return self.meta.get('solver'), self.meta.get('seed')

    def record(self, grad_units, epoch, suboptimality=None, dist_sq=None,
               dual=None):
        if self.points and grad_units <= self.points[-1].grad_units:
            raise InvalidArgument(
                "grad_units must increase: {} after {}"
                .format(grad_units, self.points[-1].grad_units))
        if suboptimality is not None and suboptimality < -NEGATIVE_SLACK:
            log.warning("negative suboptimality {!r} at {} units".format(
                suboptimality, grad_units))
        point = TracePoint(int(grad_units), int(epoch), suboptimality,
                           dist_sq, dual)
        self.points.append(point)
        return point

    def record_point(self, problem, x, grad_units, epoch, dual=None):
        """Evaluate `x` against `problem` and record it. Returns the
        suboptimality (None when the optimum is unknown).
        """
        value = suboptimality(problem, x)
        self.record(grad_units, epoch, value, dist_sq(problem, x), dual)
        return value

    def finish(self, x):
        self.x = x
        return self

    def column(self, name):
        return np.array([
            np.nan if getattr(p, name) is None else getattr(p, name)
            for p in self.points
        ], dtype=np.float64)

    @property
    def grad_units(self):
        return np.array([p.grad_units for p in self.points], dtype=np.int64)

    @property
    def epochs(self):
        return np.array([p.epoch for p in self.points], dtype=np.int64)

    @property
    def suboptimality(self):
        return self.column('suboptimality')

    @property
    def dist_sq(self):
        return self.column('dist_sq')

    @property
    def frame(self):
        """A `pandas.DataFrame` view with suboptimality clamped at 0.
        """
        import pandas as pd
        return pd.DataFrame({
            'grad_units': self.grad_units,
            'epoch': self.epochs,
            'suboptimality': np.maximum(self.suboptimality, 0.0),
            'dist_sq': self.dist_sq,
        }, columns=list(TRACE_FIELDS))

    @property
    def final(self):
        return self.points[-1] if self.points else None


RateEstimate = namedtuple('RateEstimate', 'rho_hat window r_squared')


def _series(trace):
    if isinstance(trace, Trace):
        epochs, values = trace.epochs.astype(np.float64), trace.suboptimality
        if not epochs.size:
            return epochs, values
        # inner points share a label with the epoch end recorded after them
        last = np.append(epochs[1:] != epochs[:-1], True)
        return epochs[last], values[last]
    values = np.asarray(trace, dtype=np.float64)
    return np.arange(values.size, dtype=np.float64), values


def estimate_rate(trace, window=None):
    '''Fit ``ln(suboptimality) ~ a + b * epoch`` by least squares and
    return ``exp(b)`` as the per epoch contraction.

    :param trace: a `Trace` or a plain sequence of suboptimality values
        (indexed by position)
    :param window: inclusive ``(first, last)`` epoch range; defaults to the
        last half of the recorded epochs
    '''
    epochs, values = _series(trace)
    if window is None:
        if not epochs.size:
            raise InsufficientData("empty trace")
        first = epochs[max(0, min(epochs.size // 2, epochs.size - 3))]
        window = (int(first), int(epochs[-1]))
    first, last = window
    mask = (epochs >= first) & (epochs <= last)
    epochs, values = epochs[mask], values[mask]

    # truncate at the first non-positive value
    bad = np.flatnonzero(~(values > 0))
    if bad.size:
        epochs, values = epochs[:bad[0]], values[:bad[0]]
    if values.size < 3:
        raise InsufficientData(
            "need at least 3 positive points in window {}, got {}"
            .format(window, values.size))

    logs = np.log(values)
    slope, intercept = np.polyfit(epochs, logs, 1)
    resid = logs - (slope * epochs + intercept)
    total = float(np.sum((logs - logs.mean()) ** 2))
    if total == 0:
        r_squared = 1.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - float(resid @ resid) / total))
    return RateEstimate(math.exp(slope), (int(epochs[0]), int(epochs[-1])),
                        r_squared)


def mean_trace(traces):
    """Average the suboptimality of several traces epoch by epoch (over
    the epochs every trace recorded). Returns ``(epochs, values)``.
    """
    common = None
    for trace in traces:
        epochs = set(trace.epochs.tolist())
        common = epochs if common is None else common & epochs
    if not common:
        raise InsufficientData("traces share no epochs")
    epochs = np.array(sorted(common))
    rows = []
    for trace in traces:
        lookup = dict(zip(trace.epochs.tolist(), trace.suboptimality))
        rows.append([lookup[e] for e in epochs])
    return epochs, np.mean(rows, axis=0)


def estimate_mean_rate(traces, window=None):
    """`estimate_rate` applied to the across-seed mean suboptimality.
    """
    epochs, values = mean_trace(traces)
    trace = Trace()
    for e, v in zip(epochs, values):
        trace.record(int(e) + 1, int(e), float(v))
    return estimate_rate(trace, window)


def complexity_to_eps(trace, eps, relative=False):
    """First cumulative grad_units at which suboptimality <= `eps` or None
    when never reached. With `relative` the suboptimality is divided by its
    initial value first.
    """
    if not eps > 0:
        raise InvalidArgument("eps must be positive, got {}".format(eps))
    values = trace.suboptimality
    if relative and values.size:
        if not values[0] > 0:
            return int(trace.grad_units[0])
        values = values / values[0]
    hits = np.flatnonzero(values <= eps)
    if not hits.size:
        return None
    return int(trace.grad_units[hits[0]])

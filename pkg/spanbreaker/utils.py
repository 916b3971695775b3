# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
handy utilities
"""
import os
import sys
import json
import logging

import numpy as np


class SpanbreakerError(Exception):
    """Base error for this package"""


class InvalidArgument(SpanbreakerError, ValueError):
    """An argument violates a documented precondition"""


class UnsupportedFeature(SpanbreakerError, NotImplementedError):
    """A requested variant is not implemented"""


class BudgetExhausted(SpanbreakerError):
    """The gradient budget cap would be exceeded"""


class InsufficientData(SpanbreakerError, ValueError):
    """Not enough usable points for an estimate"""


class ConfigurationError(SpanbreakerError):
    """Config error"""


class ReferenceSolveError(SpanbreakerError):
    """A reference solve ran out of budget before reaching its tolerance.
    """
    def __init__(self, msg, **diagnostics):
        super(ReferenceSolveError, self).__init__(msg)
        self.diagnostics = diagnostics

    def __str__(self):
        msg = super(ReferenceSolveError, self).__str__()
        if not self.diagnostics:
            return msg
        return '{} ({})'.format(msg, ', '.join(
            '{}={}'.format(k, v) for k, v in sorted(self.diagnostics.items())
        ))


# log lines carry the worker thread name
PREFIX = "%(asctime)s (%(threadName)s) "
LEVEL = "[%(levelname)s] "
LOG_FORMAT = PREFIX + LEVEL + (
    "%(name)s %(filename)s:%(lineno)d : %(message)s")
DATE_FORMAT = '%b %d %H:%M:%S'
TRACE = 5


def get_logger(name=None):
    '''Return the package log or a sub-log for `name` if provided.
    '''
    log = rlog = logging.getLogger('spanbreaker')
    if name and name != 'spanbreaker':
        if name.startswith('spanbreaker.'):
            name = name[len('spanbreaker.'):]
        log = rlog.getChild(name)
    return log


def log_to_stderr(level=None):
    '''Turn on logging and add a handler which writes to stderr
    '''
    log = logging.getLogger()  # the root logger
    if level:
        log.setLevel(level.upper() if not isinstance(level, int) else level)
    if not any(
        handler.stream == sys.stderr for handler in log.handlers
        if getattr(handler, 'stream', None)
    ):
        handler = logging.StreamHandler()
        # do colours if we can
        try:
            import colorlog
            colors = {
                'CRITICAL': 'bold_red',
                'ERROR': 'red',
                'WARNING': 'purple',
                'INFO': 'green',
                'DEBUG': 'yellow',
                'TRACE': 'cyan',
            }
            logging.addLevelName(TRACE, 'TRACE')
            formatter = colorlog.ColoredFormatter(
                "%(log_color)s" + LOG_FORMAT,
                datefmt=DATE_FORMAT,
                log_colors=colors
            )
        except ImportError:
            logging.warning("Colour logging not supported. Please install"
                            " the colorlog module to enable\n")
            formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

        handler.setFormatter(formatter)
        log.addHandler(handler)
    return log


def as_vector(x, d=None, name='x'):
    """Return `x` as a contiguous float64 array, checking its length
    against `d` when given.
    """
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidArgument(
            "'{}' must be a vector, got shape {}".format(name, arr.shape))
    if d is not None and arr.shape[0] != d:
        raise InvalidArgument(
            "'{}' has dimension {} but the problem has d={}"
            .format(name, arr.shape[0], d))
    return arr


def frozen(arr):
    """Return a read-only copy of `arr`.
    """
    arr = np.array(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def canonical_json(obj):
    """Serialize `obj` to the canonical (sorted, compact) json form used
    for spec echoes and summaries.
    """
    return json.dumps(obj, sort_keys=True, separators=(',', ':'))


def fmt_float(value):
    """Shortest round-trip decimal representation of a float.
    """
    return repr(float(value))


def thread_count(default=None):
    """Worker cap from the ``SPANBREAKER_THREADS`` env var (falls back to
    the number of logical cores).
    """
    value = os.environ.get('SPANBREAKER_THREADS')
    if value:
        try:
            count = int(value)
        except ValueError:
            raise ConfigurationError(
                "SPANBREAKER_THREADS must be an integer, got '{}'"
                .format(value))
        return max(1, count)
    return default or os.cpu_count() or 1


def positive(name, value):
    """Validate that `value` is a positive real and return it as float.
    """
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidArgument("'{}' must be a real number".format(name))
    if not value > 0:
        raise InvalidArgument(
            "'{}' must be positive, got {}".format(name, value))
    return value

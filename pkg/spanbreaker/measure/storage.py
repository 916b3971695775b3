# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
CSV storage for traces and result tables.
"""
import os
import tempfile
from contextlib import contextmanager

from .. import utils

try:
    import pandas as pd
except ImportError as ie:
    utils.log_to_stderr().warning(str(ie))
    pd = None
else:
    # use the entire screen width + wrapping when viewing frames in the console
    pd.set_option('display.expand_frame_repr', False)

log = utils.get_logger(__name__)

TRACE_FIELDS = ('grad_units', 'epoch', 'suboptimality', 'dist_sq')
SPEEDUP_FIELDS = ('n', 'kappa', 'eps', 'K_svrg', 'K_saga', 'ratio')


class CSVStore(object):
    """CSV storage.

    Floats are written in their shortest round-trip form and missing values
    as empty fields so that identical data gives byte identical files.
    """
    ext = 'csv'

    def __init__(self, path, fields=None):
        self.path = path
        self.fields = list(fields) if fields else None

    @classmethod
    @contextmanager
    def writer(cls, path, fields=None):
        """Yield a store whose output is moved into place only once the
        block exits cleanly.
        """
        dirname = os.path.dirname(os.path.abspath(path))
        os.makedirs(dirname, exist_ok=True)
        fd, tmppath = tempfile.mkstemp(
            prefix='.' + os.path.basename(path), suffix='.tmp', dir=dirname)
        os.close(fd)
        store = cls(tmppath, fields=fields)
        try:
            yield store
            os.replace(tmppath, path)
            store.path = path
        finally:
            if os.path.exists(tmppath):
                os.remove(tmppath)

    def put(self, df):
        """Write a `pd.DataFrame` (restricted to our fields if set).
        """
        if self.fields:
            df = df[self.fields]
        df.to_csv(self.path, index=False, float_format=utils.fmt_float,
                  na_rep='', lineterminator='\n')

    def read(self):
        """Read the csv data set into a `pd.DataFrame`
        """
        return pd.read_csv(self.path)

    @classmethod
    def write(cls, path, df, fields=None):
        with cls.writer(path, fields=fields) as store:
            store.put(df)
        log.debug("wrote {} rows to {}".format(len(df), path))
        return path

    @classmethod
    def write_trace(cls, path, trace):
        return cls.write(path, trace.frame, fields=TRACE_FIELDS)

    @classmethod
    def multiwrite(cls, storepath, items):
        """Write each ``(name, trace)`` of `items` to
        ``<storepath>/<name>.csv``.
        """
        os.makedirs(storepath, exist_ok=True)
        paths = []
        for name, trace in items:
            filepath = os.path.join(storepath, '{}.{}'.format(name, cls.ext))
            paths.append(cls.write_trace(filepath, trace))
        return paths

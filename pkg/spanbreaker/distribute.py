# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
Fan independent solver runs out over a pool of worker threads.
"""
from collections import OrderedDict, namedtuple
from concurrent import futures

from . import utils

log = utils.get_logger(__name__)

Job = namedtuple('Job', 'key func args kwargs')
Job.__new__.__defaults__ = ((), None)


def run_batch(jobs, threads=None):
    """Run every `Job` and return an ``OrderedDict`` of results sorted by
    job key, independent of completion order.

    Runs share nothing mutable, so each one sees the same inputs it would
    see serially. The first job error is re-raised after the rest finish.
    """
    jobs = list(jobs)
    keys = [job.key for job in jobs]
    if len(set(keys)) != len(keys):
        raise utils.InvalidArgument("job keys must be unique")
    threads = threads or utils.thread_count()
    workers = max(1, min(threads, len(jobs)))
    log.debug("running {} jobs on {} threads".format(len(jobs), workers))

    results = {}
    error = None
    if workers == 1:
        for job in jobs:
            results[job.key] = job.func(*job.args, **(job.kwargs or {}))
    else:
        with futures.ThreadPoolExecutor(
            max_workers=workers, thread_name_prefix='spanbreaker'
        ) as pool:
            pending = {
                pool.submit(job.func, *job.args, **(job.kwargs or {})): job
                for job in jobs
            }
            for future in futures.as_completed(pending):
                job = pending[future]
                try:
                    results[job.key] = future.result()
                except Exception as err:
                    log.error("job {} failed: {}".format(job.key, err))
                    error = error or err

    if error is not None:
        raise error
    return OrderedDict((key, results[key]) for key in sorted(results))

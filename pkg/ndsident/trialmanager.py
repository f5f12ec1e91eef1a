from __future__ import print_function

from concurrent.futures import ThreadPoolExecutor

import numpy

from .errorlog import errorlog, ErrorLog


def trial_seeds(master_seed, count):
    """Independent integer seeds for `count` trials, derived from one master seed."""
    children = numpy.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1, dtype=numpy.uint32)[0]) for child in children]


class TrialRequest(object):
    def __init__(self, index, seed, starting_cb=None, completion_cb=None):
        self.index = index
        self.seed = seed
        self.starting_cb = starting_cb
        self.completion_cb = completion_cb

        self.complete = False
        self.status = "INCOMPLETE"
        self.success = False
        self.result = None
        self.error = None

    def starting(self):
        if self.starting_cb:
            self.starting_cb(self)

    def completed(self, status, result=None, error=None):
        self.complete = True
        self.status = status
        self.success = (status == "SUCCESS")
        self.result = result
        self.error = error
        if self.completion_cb:
            self.completion_cb(self)


class TrialManager(object):
    def __init__(self):
        self.requests = []

    def purge_requests(self):
        self.requests = []

    def new_request(self, index, seed, starting_cb=None, completion_cb=None):
        req = TrialRequest(index, seed, starting_cb, completion_cb)
        self.requests.append(req)
        return req

    def _run(self, func, req):
        with errorlog.capture() as entries:
            try:
                outcome = ("SUCCESS", func(req.index, req.seed), None)
            except Exception as e:
                outcome = ("FAIL", None, "{}: {}".format(type(e).__name__, e))
        return outcome + (entries,)

    def _finish(self, req, status, result, error, entries):
        errorlog.replay(entries)
        if error:
            errorlog.add_entry("trial", req.index, error, ErrorLog.FAIL)
        req.completed(status, result, error)

    def process_request(self, func, req):
        req.starting()
        self._finish(req, *self._run(func, req))

    def process_requests(self, func, threads=1):
        """Runs func(index, seed) for every pending request.

        Callbacks fire, results land and log entries are written in request
        order whatever the thread count.  Returns the processed requests.
        """
        reqs = self.requests
        if threads <= 1:
            for req in reqs:
                self.process_request(func, req)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(self._run, func, req) for req in reqs]
                for req, fut in zip(reqs, futures):
                    req.starting()
                    self._finish(req, *fut.result())
        self.requests = []
        return reqs


trial_manager = TrialManager()


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

import threading
import time

import pytest
from ndsident.errorlog import errorlog, ErrorLog
from ndsident.trialmanager import TrialManager, TrialRequest, trial_seeds


def square(index, seed):
    return index * index


def flaky(index, seed):
    if index == 1:
        raise ValueError("bad trial")
    return index


# --- Seeds ---

def test_trial_seeds_reproducible_and_distinct():
    a = trial_seeds(7, 5)
    assert a == trial_seeds(7, 5)
    assert len(set(a)) == 5
    assert trial_seeds(8, 5) != a


def test_trial_seeds_prefix_stable():
    assert trial_seeds(3, 10)[:4] == trial_seeds(3, 4)


# --- Requests ---

def test_request_callbacks():
    seen = []
    req = TrialRequest(0, 11, lambda r: seen.append(("start", r.index)), lambda r: seen.append(("done", r.status)))
    req.starting()
    req.completed("SUCCESS", 42)
    assert seen == [("start", 0), ("done", "SUCCESS")]
    assert req.success
    assert req.result == 42


def test_process_requests_serial():
    mgr = TrialManager()
    for i in range(4):
        mgr.new_request(i, 100 + i)
    reqs = mgr.process_requests(square)
    assert [r.result for r in reqs] == [0, 1, 4, 9]
    assert mgr.requests == []


def test_failure_is_logged(capsys):
    mgr = TrialManager()
    for i in range(3):
        mgr.new_request(i, i)
    reqs = mgr.process_requests(flaky)
    assert [r.status for r in reqs] == ["SUCCESS", "FAIL", "SUCCESS"]
    assert "ValueError: bad trial" in reqs[1].error
    assert errorlog.has_errors
    assert errorlog.count(ErrorLog.FAIL) == 1


def test_threaded_results_in_order():
    order = []
    lock = threading.Lock()

    def done(req):
        with lock:
            order.append(req.index)

    mgr = TrialManager()
    for i in range(8):
        mgr.new_request(i, i, completion_cb=done)
    reqs = mgr.process_requests(square, threads=4)
    assert order == list(range(8))
    assert [r.result for r in reqs] == [i * i for i in range(8)]


def noisy(index, seed):
    # later trials finish first
    time.sleep(0.005 * (8 - index))
    errorlog.add_entry("stage1", index, "first", ErrorLog.WARN)
    errorlog.add_entry("stage1", index, "second", ErrorLog.NOTE)
    return index


def test_threaded_log_entries_in_request_order(capsys):
    mgr = TrialManager()
    for i in range(8):
        mgr.new_request(i, i)
    mgr.process_requests(noisy, threads=4)
    expected = []
    for i in range(8):
        expected += [("stage1", i, "first", ErrorLog.WARN), ("stage1", i, "second", ErrorLog.NOTE)]
    assert errorlog.errlist == expected
    lines = [line for line in capsys.readouterr().err.splitlines() if line]
    assert lines[:2] == ["!! WARNING at stage1:0: first", "!! NOTICE at stage1:0: second"]
    assert len(lines) == 16


def test_serial_and_threaded_logs_match(capsys):
    logs = []
    for threads in (1, 3):
        errorlog.clear()
        mgr = TrialManager()
        for i in range(5):
            mgr.new_request(i, i)
        mgr.process_requests(flaky, threads=threads)
        logs.append(list(errorlog.errlist))
    assert logs[0] == logs[1]

from __future__ import print_function

import sys
import json
import threading
from contextlib import contextmanager


class ErrorLog(object):
    NOTE = "notice"
    WARN = "warning"
    FAIL = "error"

    REPORT_FILE = "ndsident_report.json"

    def __init__(self):
        self._lock = threading.RLock()
        self._local = threading.local()
        self.clear()

    def clear(self):
        self.errlist = []
        self.has_errors = False
        self.badsources = {}

    def add_entry(self, source, context, msg, level):
        captured = getattr(self._local, "captured", None)
        if captured is not None:
            captured.append( (source, context, msg, level) )
            return
        with self._lock:
            self.errlist.append( (source, context, msg, level) )
            self.badsources[source] = 1
            print("\n!! {} at {}:{}: {}".format(level.upper(), source, context, msg), file=sys.stderr)
            sys.stderr.flush()
            if level == self.FAIL:
                self.has_errors = True

    @contextmanager
    def capture(self):
        """Holds back this thread's entries; yields the list they collect in.

        Pass the list to replay() to log them later, in a chosen order.
        """
        outer = getattr(self._local, "captured", None)
        self._local.captured = []
        try:
            yield self._local.captured
        finally:
            self._local.captured = outer

    def replay(self, entries):
        for entry in entries:
            self.add_entry(*entry)

    def write_report(self, path=None):
        report = [
            {
                "source": source,
                "context": context,
                "title": "ndsident {}".format(level),
                "message": msg,
                "annotation_level": level
            }
            for source, context, msg, level in self.errlist
        ]
        with open(path or self.REPORT_FILE, "w") as f:
            f.write(json.dumps(report, sort_keys=False, indent=4))

    def source_has_errors(self, source):
        return source in self.badsources

    def count(self, level=None):
        if level is None:
            return len(self.errlist)
        return sum(1 for entry in self.errlist if entry[3] == level)

errorlog = ErrorLog()


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

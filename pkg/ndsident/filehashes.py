from __future__ import print_function

import os
import os.path
import sys
import hashlib


def sha256_file(filename):
    """Hash of the given file's contents, or of nothing if it is missing.
    """
    h = hashlib.sha256()
    b = bytearray(128*1024)
    mv = memoryview(b)
    try:
        with open(filename, 'rb', buffering=0) as f:
            for n in iter(lambda : f.readinto(mv), 0):
                h.update(mv[:n])
    except FileNotFoundError:
        pass
    return h.hexdigest()


class FileHashes(object):
    """Records which config hash produced each generated artifact.
    """
    def __init__(self, hashfile):
        self.hashfile = hashfile
        self.load()

    def load(self):
        self.artifact_hashes = {}
        if os.path.isfile(self.hashfile):
            try:
                with open(self.hashfile, "r") as f:
                    for line in f.readlines():
                        artifact, hashstr = line.strip().split("|")
                        self.artifact_hashes[artifact] = hashstr
            except ValueError:
                print("Corrupt hashes file.  Ignoring.", file=sys.stderr)
                sys.stderr.flush()
                self.artifact_hashes = {}

    def save(self):
        dirname = os.path.dirname(self.hashfile)
        if dirname:
            os.makedirs(dirname, exist_ok=True)
        with open(self.hashfile, "w") as f:
            for artifact, hashstr in sorted(self.artifact_hashes.items()):
                f.write("{}|{}\n".format(artifact, hashstr))

    def is_current(self, artifact, config_hash):
        """True if artifact exists and was last produced from config_hash."""
        if not os.path.isfile(artifact):
            return False
        return self.artifact_hashes.get(artifact) == config_hash

    def record(self, artifact, config_hash):
        self.artifact_hashes[artifact] = config_hash

    def invalidate(self, artifact):
        self.artifact_hashes.pop(artifact, None)


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

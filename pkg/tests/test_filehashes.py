import hashlib
import os
import pytest
from ndsident.filehashes import FileHashes, sha256_file


def test_sha256_file_matches_hashlib(tmp_path):
    path = tmp_path / "dataset.csv"
    path.write_bytes(b"subsystem,time_s,channel,value\n")
    assert sha256_file(str(path)) == hashlib.sha256(b"subsystem,time_s,channel,value\n").hexdigest()


def test_sha256_missing_file_is_empty_hash(tmp_path):
    assert sha256_file(str(tmp_path / "nope")) == hashlib.sha256(b"").hexdigest()


def test_missing_artifact_is_not_current(tmp_path):
    fh = FileHashes(str(tmp_path / "hashes"))
    fh.record(str(tmp_path / "dataset.csv"), "abc")
    assert fh.is_current(str(tmp_path / "dataset.csv"), "abc") is False


def test_recorded_artifact_is_current(tmp_path):
    artifact = tmp_path / "dataset.csv"
    artifact.write_text("x")
    fh = FileHashes(str(tmp_path / "hashes"))
    assert fh.is_current(str(artifact), "abc") is False
    fh.record(str(artifact), "abc")
    assert fh.is_current(str(artifact), "abc") is True
    assert fh.is_current(str(artifact), "def") is False


def test_invalidate(tmp_path):
    artifact = tmp_path / "dataset.csv"
    artifact.write_text("x")
    fh = FileHashes(str(tmp_path / "hashes"))
    fh.record(str(artifact), "abc")
    fh.invalidate(str(artifact))
    fh.invalidate(str(artifact))
    assert fh.is_current(str(artifact), "abc") is False


def test_save_and_load_round_trip(tmp_path):
    hashfile = str(tmp_path / "sub" / "hashes")
    artifact = tmp_path / "dataset.csv"
    artifact.write_text("x")
    fh = FileHashes(hashfile)
    fh.record(str(artifact), "abc")
    fh.record("b_other", "def")
    fh.save()
    lines = open(hashfile).read().splitlines()
    assert lines == sorted(lines)
    assert "{}|abc".format(artifact) in lines
    assert "b_other|def" in lines
    fh2 = FileHashes(hashfile)
    assert fh2.is_current(str(artifact), "abc") is True


def test_corrupt_hashfile_is_ignored(tmp_path, capsys):
    hashfile = tmp_path / "hashes"
    hashfile.write_text("no separator here\n")
    fh = FileHashes(str(hashfile))
    assert fh.artifact_hashes == {}
    assert "Corrupt" in capsys.readouterr().err

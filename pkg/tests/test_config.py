import os

import numpy
import pytest
from ndsident.config import (
    DEFAULTS, PROFILE_DIR, apply_overrides, find_profile, load_config, parse_document,
)
from ndsident.datafiles import write_model
from ndsident.errors import ConfigError

from .conftest import make_chain


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# --- Parsing ---

def test_parse_json_keeps_exponent_floats():
    assert parse_document('{"settle_fraction": 1e-3}') == {"settle_fraction": 0.001}


def test_parse_yaml_fallback():
    assert parse_document("trials: 3\nseed: 4\n") == {"trials": 3, "seed": 4}


def test_parse_garbage():
    with pytest.raises(ConfigError):
        parse_document("a: [1, 2\n")


def test_defaults_without_file():
    cfg = load_config()
    assert cfg.samples == DEFAULTS["samples"]
    assert cfg.chain_spec().n_carts == 6
    assert cfg.noise_std == pytest.approx(numpy.sqrt(0.3))


@pytest.mark.parametrize("name", ["paper_sec5", "smoke", "noiseless"])
def test_shipped_profiles_load(name):
    path = find_profile(name)
    assert path.startswith(PROFILE_DIR)
    load_config(name)


def test_hundred_cart_profile_values():
    cfg = load_config("paper_sec5")
    assert cfg.chain_spec().n_carts == 100
    assert cfg.samples == [500, 2000, 8000]
    assert cfg.trials == 50
    assert float(cfg.t_settle) == 14.25


def test_unknown_profile():
    with pytest.raises(ConfigError):
        find_profile("no_such_profile")


# --- Overrides ---

def test_overrides_parse_values():
    doc = apply_overrides({"model": {"chain": {"n_carts": 6}}}, ["model.chain.n_carts=10", "samples=[5, 10]", "nls.enabled=true"])
    assert doc["model"]["chain"]["n_carts"] == 10
    assert doc["samples"] == [5, 10]
    assert doc["nls"] == {"enabled": True}


def test_override_needs_equals():
    with pytest.raises(ConfigError):
        apply_overrides({}, ["samples"])


def test_file_merges_over_defaults(tmp_path):
    path = write_cfg(tmp_path, '{"model": {"chain": {"seed": 4}}, "trials": 3}')
    cfg = load_config(path)
    assert cfg.chain_spec().seed == 4
    assert cfg.chain_spec().n_carts == 6
    assert cfg.trials == 3


# --- Validation ---

@pytest.mark.parametrize("override", [
    "samples=[200, 100]",
    "samples=[]",
    "noise_variance=-1",
    "noise_variance=abc",
    "simulation=euler",
    "estimator=kalman",
    "trials=0",
    "nls.restarts=0",
    "group_scales=[1, 2]",
    "schedule.interval_min=0",
    "model.chain.n_carts=1",
    "model.chain.colour=red",
    "generator.Xi=[]",
    "model.file=missing.json",
])
def test_invalid_configs(override):
    with pytest.raises(ConfigError):
        load_config(None, [override])


def test_top_level_must_be_mapping(tmp_path):
    path = write_cfg(tmp_path, "[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)


def test_model_file_relative_to_config(tmp_path):
    chain, nds = make_chain(3)
    write_model(str(tmp_path / "m.json"), nds.subsystems, nds.topology)
    path = write_cfg(tmp_path, '{"model": {"file": "m.json"}}')
    cfg = load_config(path)
    assert cfg.model_file() == os.path.join(str(tmp_path), "m.json")


# --- Derived values ---

def test_hash_is_stable_and_sensitive():
    a = load_config(None, ["seed=1"])
    b = load_config(None, ["seed=1"])
    c = load_config(None, ["seed=2"])
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert len(a.config_hash()) == 64


def test_schedule_spec_splits_samples(chain6):
    chain, nds = chain6
    cfg = load_config()
    spec = cfg.schedule_spec(nds, 101, 30.0)
    assert [w.subsystem for w in spec.windows] == [0, 5]
    assert all(w.max_samples == 51 for w in spec.windows)
    assert all(w.count_from == 30.0 for w in spec.windows)


def test_x0_vector():
    cfg = load_config(None, ["x0=[1, 2]"])
    assert list(cfg.x0_vector(2)) == [1.0, 2.0]
    with pytest.raises(ConfigError):
        cfg.x0_vector(3)
    assert list(load_config().x0_vector(2)) == [0.0, 0.0]


def test_nls_options():
    cfg = load_config(None, ["nls.max_iterations=7"])
    assert cfg.nls_options().max_iterations == 7

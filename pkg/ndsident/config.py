from __future__ import print_function

import copy
import hashlib
import json
import math
import os
import os.path

import numpy
import yaml

from .bench import ChainSpec, NlsOptions
from .errors import ConfigError, DimensionError
from .generator import InputGenerator
from .simulate import SamplingWindow, ScheduleSpec


PROFILE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "profiles")

DEFAULTS = {
    "model": {
        "chain": {
            "n_carts": 6,
            "mass_range": [1.0, 1.5],
            "spring_range": [0.5, 2.0],
            "damper_range": [0.1, 0.5],
            "unknown_coupling": None,
            "wall_anchoring": True,
            "split_forces": True,
            "seed": 0,
        },
        "file": None,
    },
    "generator": {
        "Xi": [[0.0, 0.32], [-0.32, 0.0]],
        "Pi": [[1.5, 2.0], [2.0, 1.0]],
        "xi0": [1.0, 1.0],
    },
    "schedule": {
        "interval_min": 0.1,
        "interval_max": 5.0,
        "t_start": 0.0,
        "subsystems": None,
    },
    "noise_variance": 0.3,
    "t_settle": None,
    "settle_fraction": 1e-3,
    "x0": None,
    "simulation": "auto",
    "samples": [500, 2000, 8000],
    "trials": 50,
    "seed": 0,
    "output_dir": "nds_out",
    "estimator": "batch",
    "rls_p0": 1e8,
    "rank_tol": None,
    "group_scales": [1.0, 1.0, 1.0],
    "nls": {
        "enabled": False,
        "init_levels": [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50],
        "restarts": 5,
        "max_iterations": 100,
    },
    "threads": 1,
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def parse_document(text, source="config"):
    """JSON first, then YAML for hand-written profiles."""
    try:
        return json.loads(text)
    except ValueError:
        pass
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(source, "not valid JSON or YAML: {}".format(e))


def find_profile(name):
    if os.path.isfile(name):
        return name
    for cand in (name, name + ".cfg"):
        path = os.path.join(PROFILE_DIR, cand)
        if os.path.isfile(path):
            return path
    raise ConfigError(name, "no such config file or shipped profile")


def apply_overrides(doc, overrides):
    """Applies `dotted.key=value` strings; values are parsed as YAML scalars or lists."""
    doc = copy.deepcopy(doc)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        value = yaml.safe_load(raw)
        node = doc
        parts = key.strip().split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = value
    return doc


def load_config(path=None, overrides=None):
    doc = {}
    base_dir = os.getcwd()
    if path:
        path = find_profile(path)
        base_dir = os.path.dirname(os.path.abspath(path))
        with open(path, "r") as f:
            doc = parse_document(f.read(), path) or {}
        if not isinstance(doc, dict):
            raise ConfigError(path, "top level must be a mapping")
    doc = apply_overrides(_merge(DEFAULTS, doc), overrides)
    cfg = ExperimentConfig(doc, base_dir)
    cfg.validate()
    return cfg


def _float(doc, key):
    val = doc.get(key)
    try:
        return float(val)
    except (TypeError, ValueError):
        raise ConfigError(key, "expected a number, got {!r}".format(val))


class ExperimentConfig(object):
    def __init__(self, doc, base_dir="."):
        self.doc = doc
        self.base_dir = base_dir
        self.model = doc.get("model", {})
        self.generator_doc = doc.get("generator", {})
        self.schedule = doc.get("schedule", {})
        self.noise_variance = doc.get("noise_variance", 0.0)
        self.t_settle = doc.get("t_settle")
        self.settle_fraction = doc.get("settle_fraction", 1e-3)
        self.x0 = doc.get("x0")
        self.simulation = doc.get("simulation", "auto")
        self.samples = list(doc.get("samples", []))
        self.trials = doc.get("trials", 1)
        self.seed = doc.get("seed", 0)
        self.output_dir = doc.get("output_dir", "nds_out")
        self.estimator = doc.get("estimator", "batch")
        self.rls_p0 = doc.get("rls_p0", 1e8)
        self.rank_tol = doc.get("rank_tol")
        self.group_scales = doc.get("group_scales") or [1.0, 1.0, 1.0]
        self.nls = doc.get("nls", {})
        self.threads = doc.get("threads", 1)

    def validate(self):
        for key in ("noise_variance", "settle_fraction", "rls_p0"):
            _float(self.doc, key)
        if float(self.noise_variance) < 0:
            raise ConfigError("noise_variance", "must be nonnegative")
        if self.t_settle is not None:
            _float(self.doc, "t_settle")
        if self.simulation not in ("auto", "full", "steady"):
            raise ConfigError("simulation", "must be auto, full or steady")
        if self.estimator not in ("batch", "rls"):
            raise ConfigError("estimator", "must be batch or rls")
        if not self.samples or any(int(n) < 1 for n in self.samples):
            raise ConfigError("samples", "need a list of positive sample counts")
        if any(b <= a for a, b in zip(self.samples, self.samples[1:])):
            raise ConfigError("samples", "sweep must be strictly ascending")
        if int(self.trials) < 1:
            raise ConfigError("trials", "must be at least 1")
        if len(self.group_scales) != 3:
            raise ConfigError("group_scales", "need three scale factors")
        if int(self.threads) < 1:
            raise ConfigError("threads", "must be at least 1")
        if int(self.nls.get("restarts", 5)) < 1:
            raise ConfigError("nls.restarts", "must be at least 1")
        if self.model.get("file"):
            path = self.model_file()
            if not os.path.isfile(path):
                raise ConfigError("model.file", "{} does not exist".format(path))
        else:
            self.chain_spec().validate()
        gen = self.generator()
        if gen.m_xi == 0:
            raise ConfigError("generator", "Xi must not be empty")
        lo = _float(self.schedule, "interval_min")
        hi = _float(self.schedule, "interval_max")
        if not 0 < lo <= hi:
            raise ConfigError("schedule", "need 0 < interval_min <= interval_max")

    @property
    def noise_std(self):
        return math.sqrt(float(self.noise_variance))

    def model_file(self):
        path = self.model["file"]
        if not os.path.isabs(path):
            path = os.path.join(self.base_dir, path)
        return path

    def chain_spec(self):
        spec = self.model.get("chain") or {}
        try:
            return ChainSpec(**spec)
        except TypeError as e:
            raise ConfigError("model.chain", str(e))

    def generator(self):
        g = self.generator_doc
        try:
            return InputGenerator(g["Xi"], g["Pi"], g["xi0"])
        except KeyError as e:
            raise ConfigError("generator", "missing key {}".format(e))
        except DimensionError as e:
            raise ConfigError("generator", e.message)

    def nls_options(self):
        return NlsOptions(max_iterations=self.nls.get("max_iterations", 100))

    def schedule_spec(self, nds, steady_samples, t_settle):
        """Windows for every sampled subsystem, sized to yield `steady_samples` records after t_settle."""
        subsystems = self.schedule.get("subsystems")
        if subsystems is None:
            subsystems = [k for k, (a, b) in enumerate(nds.y_offsets) if b > a]
        if not subsystems:
            raise ConfigError("schedule.subsystems", "no subsystem has outputs to sample")
        per = int(math.ceil(float(steady_samples) / len(subsystems)))
        return ScheduleSpec([
            SamplingWindow(
                k,
                t_start=float(self.schedule.get("t_start", 0.0)),
                interval_min=float(self.schedule["interval_min"]),
                interval_max=float(self.schedule["interval_max"]),
                max_samples=per,
                count_from=t_settle,
            )
            for k in subsystems
        ])

    def x0_vector(self, m_x):
        if self.x0 is None:
            return numpy.zeros(m_x)
        x0 = numpy.asarray(self.x0, dtype=float).reshape(-1)
        if x0.size != m_x:
            raise ConfigError("x0", "needs {} entries, got {}".format(m_x, x0.size))
        return x0

    def canonical(self):
        return json.dumps(self.doc, sort_keys=True, separators=(",", ":"))

    def config_hash(self):
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

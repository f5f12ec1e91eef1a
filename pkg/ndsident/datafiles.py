from __future__ import print_function

import csv
import json
import math
import os
import os.path

import numpy

from .errors import DataFileError
from .generator import InputGenerator
from .model import DescriptorSubsystem, Topology
from .simulate import SampleDataset, SampleRecord
from .utils import format_float, format_time


DATASET_HEADER = ["subsystem", "time_s", "channel", "value"]
ESTIMATE_HEADER = ["index", "value"]
CURVE_HEADER = ["samples", "e_eta", "e_theta"]
SUMMARY_HEADER = [
    "config_hash", "estimator", "samples", "e_eta", "e_theta",
    "gamma_rank_ok", "gamma_cond", "psi_rank_ok", "psi_cond",
]
COMPARE_HEADER = ["init_level", "nls_e_theta", "two_stage_e_theta", "nls_iterations", "nls_cost"]
COMPARE_RUNS_HEADER = ["init_level", "run", "e_theta", "iterations", "cost"]
COMPARE_TRAJECTORY_HEADER = ["init_level", "iteration", "e_theta"]
MONTECARLO_TRIALS_HEADER = ["trial", "seed", "samples", "e_eta", "e_theta", "theta_hat"]
MONTECARLO_HEADER = [
    "samples", "trials", "failures",
    "median_e_eta", "mean_e_eta", "std_e_eta",
    "median_e_theta", "mean_e_theta", "std_e_theta",
    "bias_theta_norm", "max_bias_ratio",
]


def sidecar_path(path, suffix):
    stem, _ = os.path.splitext(path)
    return stem + suffix


def _ensure_dir(path):
    dirname = os.path.dirname(path)
    if dirname:
        os.makedirs(dirname, exist_ok=True)


def _fmt(val):
    if isinstance(val, bool) or val is None:
        return str(val)
    if isinstance(val, (int, numpy.integer)):
        return str(int(val))
    if isinstance(val, (float, numpy.floating)):
        return format_float(val)
    return str(val)


def write_csv(path, header, rows):
    _ensure_dir(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path, header):
    try:
        with open(path, "r", newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise DataFileError(path, "cannot read: {}".format(e))
    if not rows or rows[0] != header:
        raise DataFileError(path, "expected header {}".format(",".join(header)))
    return rows[1:]


def _json_safe(obj):
    """Matrices as row-major nested lists, infinities as null."""
    if isinstance(obj, numpy.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (numpy.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else None
    if isinstance(obj, (numpy.integer,)):
        return int(obj)
    if isinstance(obj, numpy.bool_):
        return bool(obj)
    return obj


def write_json(path, doc):
    _ensure_dir(path)
    with open(path, "w") as f:
        f.write(json.dumps(_json_safe(doc), indent=2))
        f.write("\n")


def read_json(path):
    try:
        with open(path, "r") as f:
            return json.load(f)
    except OSError as e:
        raise DataFileError(path, "cannot read: {}".format(e))
    except ValueError as e:
        raise DataFileError(path, "invalid JSON: {}".format(e))


# --- Model documents ---

def model_document(subsystems, topology, gen=None):
    doc = {
        "subsystems": [
            dict({name: mat for name, mat in sub.matrices().items()}, dims=list(sub.dims))
            for sub in subsystems
        ],
        "topology": {
            "phi0": topology.phi0,
            "basis": list(topology.basis),
            "theta": topology.theta,
            "bounds": [[lo, hi] for lo, hi in topology.bounds],
        },
    }
    if gen is not None:
        doc["generator"] = {"Xi": gen.Xi, "Pi": gen.Pi, "xi0": gen.xi0}
    return doc


def _shaped(data, rows, cols):
    arr = numpy.array(data, dtype=float)
    if arr.size == 0:
        return numpy.zeros((rows, cols))
    return arr.reshape(rows, cols)


def write_model(path, subsystems, topology, gen=None):
    write_json(path, model_document(subsystems, topology, gen))


def read_model(path):
    """Returns (subsystems, topology, generator or None)."""
    doc = read_json(path)
    try:
        subsystems = []
        for i, sub in enumerate(doc["subsystems"]):
            dims = [int(d) for d in sub["dims"]]
            sizes = dict(zip(("m_x", "m_v", "m_u", "m_z", "m_y"), dims))
            blocks = {}
            for name, (rdim, cdim) in DescriptorSubsystem.BLOCK_DIMS.items():
                blocks[name] = _shaped(sub.get(name, []), sizes[rdim], sizes[cdim])
            E = _shaped(sub["E"], sizes["m_x"], sizes["m_x"])
            subsystems.append(DescriptorSubsystem(E, dims=dims, **blocks))
        top = doc["topology"]
        m_v = sum(s.m_v for s in subsystems)
        m_z = sum(s.m_z for s in subsystems)
        bounds = [
            (-math.inf if lo is None else lo, math.inf if hi is None else hi)
            for lo, hi in top.get("bounds", [])
        ] or None
        topology = Topology(
            _shaped(top["phi0"], m_v, m_z),
            [_shaped(b, m_v, m_z) for b in top.get("basis", [])],
            top.get("theta"),
            bounds,
        )
        gen = None
        if "generator" in doc:
            g = doc["generator"]
            gen = InputGenerator(g["Xi"], g["Pi"], g["xi0"])
    except (KeyError, TypeError, ValueError) as e:
        raise DataFileError(path, "malformed model document: {}".format(e))
    return subsystems, topology, gen


# --- Datasets ---

def write_dataset(path, dataset, extra_meta=None):
    rows = []
    for rec in dataset.records:
        for ch, val in enumerate(rec.y):
            rows.append((rec.subsystem, format_time(rec.t), ch, format_float(val)))
    write_csv(path, DATASET_HEADER, rows)
    meta = dict(dataset.meta)
    meta.update({
        "seed": dataset.rng_seed,
        "noise_variance": dataset.noise_variance,
        "t_settle": dataset.t_settle,
        "transient_bound": dataset.transient_bound,
    })
    meta.update(extra_meta or {})
    write_json(sidecar_path(path, ".meta.json"), meta)


def read_dataset(path):
    rows = read_csv(path, DATASET_HEADER)
    meta_path = sidecar_path(path, ".meta.json")
    meta = read_json(meta_path) if os.path.isfile(meta_path) else {}
    records = []
    current = None
    values = []
    try:
        for row in rows:
            k, t, ch, val = int(row[0]), float(row[1]), int(row[2]), float(row[3])
            if ch == 0:
                if current is not None:
                    records.append(SampleRecord(current[0], current[1], numpy.array(values)))
                current = (k, t)
                values = []
            elif current is None or current != (k, t) or ch != len(values):
                raise DataFileError(path, "channels out of order at subsystem {} t={}".format(k, t))
            values.append(val)
    except (IndexError, ValueError) as e:
        raise DataFileError(path, "bad row: {}".format(e))
    if current is not None:
        records.append(SampleRecord(current[0], current[1], numpy.array(values)))
    noise_variance = meta.pop("noise_variance", 0.0) or 0.0
    t_settle = meta.pop("t_settle", 0.0) or 0.0
    seed = meta.pop("seed", None)
    bound = meta.pop("transient_bound", None)
    return SampleDataset(records, noise_variance, t_settle, seed, bound, meta)


# --- Estimates and reports ---

def write_estimate(path, eta):
    write_csv(path, ESTIMATE_HEADER, enumerate(eta.eta_bar))
    labels = [
        {"index": i, "mode": mode, "channel": ch, "part": part}
        for i, (mode, ch, part) in enumerate(eta.labels())
    ]
    write_json(sidecar_path(path, ".labels.json"), labels)


def stage2_document(report):
    proj = report.projections
    return {
        "Yss_hat": report.Yss_hat,
        "X_top": report.X_top,
        "X_btm": report.X_btm,
        "theta_hat": report.theta_hat,
        "gamma_rank_ok": report.gamma_rank_ok,
        "gamma_cond": report.gamma_cond,
        "gamma_residual": report.gamma_residual,
        "psi_rank_ok": report.psi_rank_ok,
        "psi_cond": report.psi_cond,
        "psi_residual": report.psi_residual,
        "imag_residue": report.imag_residue,
        "ranks": {"M": proj.r_M, "N": proj.r_N, "Q": proj.r_Q},
    }


def write_report(path, ident):
    doc = {
        "config_hash": ident.config_hash,
        "estimator": ident.estimator,
        "eta_hat": ident.eta_hat.eta_bar,
        "stage1": {
            "rank_ok": ident.stage1.rank_ok,
            "condition_number": ident.stage1.condition_number,
            "residual_norm": ident.stage1.residual_norm,
            "n_samples": ident.stage1.n_samples,
        },
        "stage2": stage2_document(ident.stage2),
        "errors": {"e_eta": ident.errors.e_eta, "e_theta": ident.errors.e_theta},
        "curve": [list(p) for p in ident.curve],
    }
    doc.update(ident.extra)
    write_json(path, doc)


def write_curve(path, curve):
    write_csv(path, CURVE_HEADER, curve)


def write_summary(path, ident):
    s2 = ident.stage2
    row = (
        ident.config_hash, ident.estimator, ident.stage1.n_samples,
        ident.errors.e_eta, ident.errors.e_theta,
        s2.gamma_rank_ok, s2.gamma_cond, s2.psi_rank_ok, s2.psi_cond,
    )
    write_csv(path, SUMMARY_HEADER, [row])


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

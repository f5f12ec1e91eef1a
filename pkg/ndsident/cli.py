from __future__ import print_function

import os
import os.path
import sys
import argparse

import numpy

from .bench import build_chain, draw_initial_theta, nls_baseline, rank_audit, relative_error
from .config import load_config
from .datafiles import (
    COMPARE_HEADER, COMPARE_RUNS_HEADER, COMPARE_TRAJECTORY_HEADER, MONTECARLO_HEADER, MONTECARLO_TRIALS_HEADER,
    read_dataset, read_model, write_csv, write_curve, write_dataset,
    write_estimate, write_model, write_report, write_summary,
)
from .errorlog import errorlog, ErrorLog
from .errors import ConfigError, IdentifiabilityError, NdsIdentException
from .filehashes import FileHashes, sha256_file
from .identify import run_identification
from .model import assemble_nds, check_regularity
from .simulate import make_schedule, measure, resolve_settling
from .stage2 import build_projections, identifiability_report
from .trialmanager import trial_manager, trial_seeds


DATASET_FILE = "dataset.csv"
MODEL_FILE = "model.json"
HASHES_FILE = ".ndsident_hashes"
NLS_STREAM = 2


class Options(object):
    def __init__(self, args):
        self.command = args.command
        self.config = args.config
        self.output_dir = args.output_dir
        self.seed = args.seed
        self.overrides = list(args.set or [])
        self.force = args.force
        self.quiet = args.quiet
        self.report = args.report
        self.dataset = args.dataset


class Experiment(object):
    """Model, generator and settling time resolved from one config document."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.chain = None
        if cfg.model.get("file"):
            subsystems, topology, _ = read_model(cfg.model_file())
        else:
            self.chain = build_chain(cfg.chain_spec())
            subsystems, topology = self.chain.subsystems, self.chain.topology
        self.nds = assemble_nds(subsystems, topology)
        self.gen = cfg.generator()
        self.t_settle = resolve_settling(self.nds, cfg.t_settle, float(cfg.settle_fraction))
        self.config_hash = cfg.config_hash()

    def path(self, name):
        return os.path.join(self.cfg.output_dir, name)

    def make_dataset(self, seed):
        cfg = self.cfg
        spec = cfg.schedule_spec(self.nds, max(cfg.samples), self.t_settle)
        schedule = make_schedule(spec, seed)
        dataset = measure(
            self.nds, self.gen, cfg.x0_vector(self.nds.m_x), schedule,
            cfg.noise_std, seed, cfg.simulation, self.t_settle,
        )
        dataset.meta["schedule"] = spec.as_dict()
        return dataset


class Progress(object):
    def __init__(self, quiet=False):
        self.quiet = quiet

    def step(self, msg):
        if not self.quiet:
            print(msg, end="")
            sys.stdout.flush()

    def done(self, msg="done"):
        if not self.quiet:
            print(msg)
            sys.stdout.flush()

    def trial_started(self, req):
        self.step("  Trial {}... ".format(req.index + 1))

    def trial_completed(self, req):
        self.done("ok" if req.success else "FAILED")


def cmd_generate(exp, opts, progress):
    dataset_path = exp.path(DATASET_FILE)
    hashes = FileHashes(exp.path(HASHES_FILE))
    if not opts.force and hashes.is_current(dataset_path, exp.config_hash):
        progress.done("{} is up to date.".format(dataset_path))
        return dataset_path
    progress.step("Generating {}... ".format(dataset_path))
    dataset = exp.make_dataset(exp.cfg.seed)
    write_dataset(dataset_path, dataset, {"config_hash": exp.config_hash, "noise_std": exp.cfg.noise_std})
    model_path = exp.path(MODEL_FILE)
    write_model(model_path, exp.nds.subsystems, exp.nds.topology, exp.gen)
    hashes.record(dataset_path, exp.config_hash)
    hashes.record(model_path, exp.config_hash)
    hashes.save()
    progress.done("{} samples".format(len(dataset)))
    return dataset_path


def _load_dataset(exp, opts, progress):
    path = opts.dataset or exp.path(DATASET_FILE)
    if not opts.dataset and not os.path.isfile(path):
        cmd_generate(exp, opts, progress)
    return path, read_dataset(path)


def _require_identifiable(exp, opts):
    diag = identifiability_report(exp.nds, exp.gen, exp.cfg.rank_tol)
    flags = (diag.stage1_pe_hint, diag.gamma_rank_ok, diag.psi_rank_at_truth)
    if not all(flags) and not opts.force:
        raise IdentifiabilityError(
            "diagnose",
            "identifiability conditions fail (pe={}, gamma={}, psi={}); use --force to proceed".format(*flags),
        )
    return diag


def cmd_identify(exp, opts, progress):
    _require_identifiable(exp, opts)
    path, dataset = _load_dataset(exp, opts, progress)
    cfg = exp.cfg
    progress.step("Identifying from {} ({} estimator)... ".format(path, cfg.estimator))
    ident = run_identification(
        exp.nds, exp.gen, dataset, cfg.samples, cfg.estimator,
        cfg.rank_tol, cfg.group_scales, float(cfg.rls_p0),
        config_hash=exp.config_hash,
    )
    ident.extra["dataset_sha256"] = sha256_file(path)
    progress.done("e_theta={}".format(ident.errors.e_theta))
    write_report(exp.path("report.json"), ident)
    write_curve(exp.path("curve.csv"), ident.curve)
    write_estimate(exp.path("estimate.csv"), ident.eta_hat)
    write_summary(exp.path("summary.csv"), ident)
    if not ident.identifiable and not opts.force:
        raise IdentifiabilityError("identify", "estimate is rank deficient; use --force to accept it")
    return ident


def cmd_compare_nls(exp, opts, progress):
    cfg = exp.cfg
    if not cfg.nls.get("enabled", False):
        progress.done("NLS baseline disabled; nothing to compare.")
        return None
    path, dataset = _load_dataset(exp, opts, progress)
    theta_true = exp.nds.theta
    ident = run_identification(exp.nds, exp.gen, dataset, [], cfg.estimator, cfg.rank_tol, cfg.group_scales,
                               float(cfg.rls_p0), config_hash=exp.config_hash)
    two_stage = ident.errors.e_theta
    rng = numpy.random.Generator(numpy.random.Philox(numpy.random.SeedSequence(cfg.seed, spawn_key=(NLS_STREAM,))))
    nls_opts = cfg.nls_options()
    rows, runs, paths = [], [], []
    for level in cfg.nls.get("init_levels", []):
        progress.step("NLS at init error {:.0%}... ".format(level))
        best = None
        for run in range(int(cfg.nls.get("restarts", 5))):
            start = draw_initial_theta(theta_true, level, rng)
            res = nls_baseline(dataset, exp.nds, exp.gen, start, nls_opts, theta_true)
            err = relative_error(res.theta_nls, theta_true, "nls")
            runs.append((level, run, err, res.iterations, res.final_cost))
            if best is None or err < best[0]:
                best = (err, res)
        rows.append((level, best[0], two_stage, best[1].iterations, best[1].final_cost))
        # entry 0 is the starting point
        paths.extend((level, i, e) for i, e in enumerate(best[1].trajectory))
        progress.done("e_theta={}".format(best[0]))
    write_csv(exp.path("compare_nls.csv"), COMPARE_HEADER, rows)
    write_csv(exp.path("compare_nls_runs.csv"), COMPARE_RUNS_HEADER, runs)
    write_csv(exp.path("compare_nls_trajectory.csv"), COMPARE_TRAJECTORY_HEADER, paths)
    return rows


def aggregate_trials(samples, results, theta_true):
    """One aggregate row per sweep point over the successful trials."""
    theta_true = numpy.asarray(theta_true, dtype=float)
    rows = []
    for i, n in enumerate(samples):
        e_eta, e_theta, thetas = [], [], []
        for res in results:
            if res is None or i >= len(res.curve):
                continue
            e_eta.append(res.curve[i].e_eta)
            e_theta.append(res.curve[i].e_theta)
            thetas.append(res.curve_theta[i])
        count = len(e_theta)
        failures = len(results) - count
        if count == 0:
            rows.append((n, 0, failures) + (float("nan"),) * 8)
            continue
        thetas = numpy.array(thetas)
        bias = thetas.mean(axis=0) - theta_true
        if count > 1:
            stderr = thetas.std(axis=0, ddof=1) / numpy.sqrt(count)
        else:
            stderr = numpy.full(bias.shape, numpy.inf)
        with numpy.errstate(divide="ignore", invalid="ignore"):
            ratio = numpy.where(stderr > 0, numpy.abs(bias) / stderr, numpy.where(bias == 0, 0.0, numpy.inf))
        rows.append((
            n, count, failures,
            float(numpy.median(e_eta)), float(numpy.mean(e_eta)), float(numpy.std(e_eta)),
            float(numpy.median(e_theta)), float(numpy.mean(e_theta)), float(numpy.std(e_theta)),
            float(numpy.linalg.norm(bias)), float(numpy.max(ratio)) if ratio.size else 0.0,
        ))
    return rows


def cmd_montecarlo(exp, opts, progress):
    cfg = exp.cfg
    trials = int(cfg.trials)
    if trials < 2:
        raise ConfigError("trials", "Monte Carlo needs at least 2 trials")

    def run_trial(index, seed):
        dataset = exp.make_dataset(seed)
        return run_identification(exp.nds, exp.gen, dataset, cfg.samples, cfg.estimator, cfg.rank_tol,
                                  cfg.group_scales, float(cfg.rls_p0), config_hash=exp.config_hash)

    progress.done("Running {} trials on {} thread(s).".format(trials, cfg.threads))
    trial_manager.purge_requests()
    for index, seed in enumerate(trial_seeds(cfg.seed, trials)):
        trial_manager.new_request(index, seed, progress.trial_started, progress.trial_completed)
    reqs = trial_manager.process_requests(run_trial, int(cfg.threads))

    per_trial = []
    for req in reqs:
        if not req.success:
            continue
        for point, theta in zip(req.result.curve, req.result.curve_theta):
            per_trial.append((req.index, req.seed, point.samples, point.e_eta, point.e_theta,
                              " ".join(repr(float(v)) for v in theta)))
    write_csv(exp.path("montecarlo_trials.csv"), MONTECARLO_TRIALS_HEADER, per_trial)
    rows = aggregate_trials(cfg.samples, [req.result if req.success else None for req in reqs], exp.nds.theta)
    write_csv(exp.path("montecarlo.csv"), MONTECARLO_HEADER, rows)
    failures = sum(1 for req in reqs if not req.success)
    if failures:
        errorlog.add_entry("montecarlo", "trials", "{} of {} trials failed".format(failures, trials), ErrorLog.WARN)
    return rows


def cmd_diagnose(exp, opts, progress):
    nds = exp.nds
    diag = check_regularity(nds, float(exp.cfg.settle_fraction), exp.cfg.t_settle)
    ident = identifiability_report(nds, exp.gen, exp.cfg.rank_tol)
    proj = build_projections(nds, exp.cfg.rank_tol)
    print("model: m_x={} m_z={} m_v={} m_u={} m_y={} m_theta={}".format(
        nds.m_x, nds.m_z, nds.m_v, nds.m_u, nds.m_y, nds.topology.m_theta))
    print("wellposed: {}".format(diag.wellposed))
    print("regular_pencil: {}".format(diag.regular_pencil))
    print("stable: {}".format(diag.stable))
    print("settling_bound: {}".format(diag.settling_bound))
    print("t_settle: {}".format(exp.t_settle))
    print("rank M/N/Q: {}/{}/{}".format(proj.r_M, proj.r_N, proj.r_Q))
    print("stage1_pe_hint: {}".format(ident.stage1_pe_hint))
    print("gamma_rank_ok: {} (cond {})".format(ident.gamma_rank_ok, ident.gamma_cond))
    print("psi_rank_at_truth: {} (cond {})".format(ident.psi_rank_at_truth, ident.psi_cond))
    if exp.chain is not None:
        audit = rank_audit(nds)
        print("normal rank G_yv: {} of {}".format(audit["G_yv"], audit["m_v"]))
        print("normal rank G_zu: {} of {}".format(audit["G_zu"], audit["m_z"]))
    sys.stdout.flush()
    return ident


COMMANDS = {
    "generate": cmd_generate,
    "identify": cmd_identify,
    "compare-nls": cmd_compare_nls,
    "montecarlo": cmd_montecarlo,
    "diagnose": cmd_diagnose,
}


def run(opts):
    overrides = list(opts.overrides)
    if opts.output_dir:
        overrides.append("output_dir={}".format(opts.output_dir))
    if opts.seed is not None:
        overrides.append("seed={}".format(opts.seed))
    cfg = load_config(opts.config, overrides)
    exp = Experiment(cfg)
    return COMMANDS[opts.command](exp, opts, Progress(opts.quiet))


def main(argv=None):
    parser = argparse.ArgumentParser(prog='nds-ident')
    parser.add_argument('command', choices=sorted(COMMANDS.keys()),
                        help='Experiment step to run.')
    parser.add_argument('-c', '--config',
                        help='Config document, or the name of a shipped profile (paper_sec5, smoke, noiseless).')
    parser.add_argument('-o', '--output-dir',
                        help='Directory to write datasets and reports into.  Overrides output_dir.')
    parser.add_argument('-s', '--seed', type=int,
                        help='Master seed.  Overrides seed.')
    parser.add_argument('--set', action='append', metavar='KEY=VALUE',
                        help='Override one config key, e.g. --set model.chain.n_carts=10')
    parser.add_argument('--dataset',
                        help='Dataset CSV to identify from, instead of the one in the output directory.')
    parser.add_argument('-f', '--force', action="store_true",
                        help='Regenerate up-to-date files, and proceed past failed identifiability checks.')
    parser.add_argument('-q', '--quiet', action="store_true",
                        help="Suppress printing of progress data.")
    parser.add_argument('-r', '--report', action="store_true",
                        help='If given, write all warnings and errors to {}'.format(ErrorLog.REPORT_FILE))
    opts = Options(parser.parse_args(argv))

    code = 0
    try:
        run(opts)
    except NdsIdentException as e:
        print(e, file=sys.stderr)
        code = e.exit_code
    except OSError as e:
        print(e, file=sys.stderr)
        code = 3
    except KeyboardInterrupt:
        print(" Aborting.", file=sys.stderr)
        code = 1
    if opts.report:
        errorlog.write_report()
    sys.exit(code)


if __name__ == "__main__":
    main()


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

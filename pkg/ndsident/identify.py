from __future__ import print_function

from collections import namedtuple

from .bench import relative_errors
from .errorlog import errorlog, ErrorLog
from .generator import analyze_generator, coefficients
from .stage1 import DEFAULT_P0, estimate_batch, estimate_rls, oracle_eta
from .stage2 import identify_stage2


CurvePoint = namedtuple("CurvePoint", ["samples", "e_eta", "e_theta"])


class IdentificationReport(object):
    def __init__(self, eta_hat, stage1, stage2, curve, estimator, errors, config_hash=None, extra=None, curve_theta=None):
        self.eta_hat = eta_hat
        self.stage1 = stage1
        self.stage2 = stage2
        self.curve = curve
        self.estimator = estimator
        self.errors = errors
        self.config_hash = config_hash
        self.extra = dict(extra or {})
        self.curve_theta = list(curve_theta or [])

    @property
    def theta_hat(self):
        return self.stage2.theta_hat

    @property
    def identifiable(self):
        return self.stage1.rank_ok and self.stage2.identifiable


def run_identification(nds, gen, dataset, sweep=None, estimator="batch", rank_tol=None, group_scales=None,
                       p0_scale=DEFAULT_P0, theta_true=None, eta_true=None, config_hash=None):
    """Stage 1 then Stage 2 on `dataset`, plus the error curve over the first-N steady samples.

    `nds` supplies the known blocks and, unless theta_true/eta_true are
    given, the reference values the errors are measured against.
    """
    spectrum = analyze_generator(gen)
    coeffs = coefficients(gen, spectrum)
    offsets = nds.y_offsets
    if theta_true is None:
        theta_true = nds.theta
    if eta_true is None:
        eta_true = oracle_eta(nds, spectrum)

    n_steady = len(dataset.steady_records)
    sweep = sorted(int(n) for n in (sweep or []))
    too_big = [n for n in sweep if n > n_steady]
    if too_big:
        errorlog.add_entry("identify", "sweep", "only {} steady samples; skipping {}".format(n_steady, too_big), ErrorLog.WARN)
    sweep = [n for n in sweep if n <= n_steady]

    def stage2_errors(eta_hat):
        report = identify_stage2(nds, gen, spectrum, eta_hat, rank_tol, group_scales)
        return report, relative_errors(eta_hat, eta_true, report.theta_hat, theta_true)

    curve = []
    curve_theta = []
    batch = estimate_batch(dataset, spectrum, coeffs, offsets)
    if estimator == "rls":
        state, snaps = estimate_rls(dataset, spectrum, coeffs, offsets, p0_scale, sweep)
        for n in sweep:
            rep, errs = stage2_errors(snaps[n])
            curve.append(CurvePoint(n, errs.e_eta, errs.e_theta))
            curve_theta.append(rep.theta_hat)
        eta_hat = state.estimate(spectrum, nds.m_y)
    else:
        for n in sweep:
            est = estimate_batch(dataset.first_steady(n), spectrum, coeffs, offsets)
            rep, errs = stage2_errors(est.eta_hat)
            curve.append(CurvePoint(n, errs.e_eta, errs.e_theta))
            curve_theta.append(rep.theta_hat)
        eta_hat = batch.eta_hat
    stage2, errors = stage2_errors(eta_hat)
    return IdentificationReport(eta_hat, batch, stage2, curve, estimator, errors, config_hash, curve_theta=curve_theta)


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

from __future__ import print_function

from collections import namedtuple

import numpy
import scipy.linalg

from .errorlog import errorlog, ErrorLog
from .errors import DimensionError, InsufficientData, PreSettlingSample
from .generator import psi
from .model import transfer_eval
from .utils import frozen, lstsq_pivoted, unvec, vec


STAGE1_RANK_TOL = 1e-10
DEFAULT_P0 = 1e8

BatchEstimate = namedtuple("BatchEstimate", ["eta_hat", "rank_ok", "residual_norm", "condition_number", "n_samples"])


class InterpolationVector(object):
    """Packed tangential interpolations.

    eta_bar = vec([eta_r,1 ... eta_r,m_r, Re eta_c,1, Im eta_c,1, ...]), one
    m_y block per entry of psi(t), so that y_s(t) = mat(eta_bar) psi(t).
    """

    def __init__(self, eta_bar, m_y, spectrum):
        self.eta_bar = frozen(numpy.asarray(eta_bar, dtype=float).reshape(-1))
        self.m_y = int(m_y)
        self.spectrum = spectrum
        if self.eta_bar.size != spectrum.d * self.m_y:
            raise DimensionError("eta_bar", "length {} does not match {} modes x {} outputs".format(
                self.eta_bar.size, spectrum.d, self.m_y))

    @classmethod
    def from_columns(cls, eta_r, eta_c, spectrum):
        m_y = eta_r.shape[0]
        m_r = spectrum.m_r
        H = numpy.zeros((m_y, spectrum.d))
        H[:, :m_r] = eta_r
        H[:, m_r::2] = eta_c.real
        H[:, m_r + 1::2] = eta_c.imag
        return cls(vec(H), m_y, spectrum)

    def __len__(self):
        return self.eta_bar.size

    def matrix(self):
        return unvec(self.eta_bar, self.m_y, self.spectrum.d)

    @property
    def eta_r(self):
        return self.matrix()[:, :self.spectrum.m_r]

    @property
    def eta_c(self):
        H = self.matrix()
        m_r = self.spectrum.m_r
        return H[:, m_r::2] + 1j * H[:, m_r + 1::2]

    def labels(self):
        """(mode, channel, part) for each entry of eta_bar."""
        modes = ["r{}".format(i + 1) for i in range(self.spectrum.m_r)]
        parts = ["re"] * self.spectrum.m_r
        for i in range(self.spectrum.m_c):
            modes.extend(["c{}".format(i + 1)] * 2)
            parts.extend(["re", "im"])
        out = []
        for mode, part in zip(modes, parts):
            for ch in range(self.m_y):
                out.append((mode, ch, part))
        return out


def regressor_from_psi(psi_vec, rows, m_y):
    """S_k (psi^T kron I_{m_y}) for the output rows [start, stop)."""
    start, stop = rows
    S = numpy.eye(m_y)[start:stop]
    return numpy.kron(numpy.asarray(psi_vec).reshape(1, -1), S)


def regressor_row(spectrum, coeffs, sample, offsets):
    m_y = offsets[-1][1] if offsets else 0
    return regressor_from_psi(psi(spectrum, coeffs, sample.t), offsets[sample.subsystem], m_y)


def regressor_matrix(spectrum, coeffs, records, offsets):
    """Stacked regressor rows and measurements for `records`."""
    d = spectrum.d * (offsets[-1][1] if offsets else 0)
    blocks = [regressor_row(spectrum, coeffs, r, offsets) for r in records]
    ys = [numpy.asarray(r.y, dtype=float) for r in records]
    if not blocks:
        return numpy.zeros((0, d)), numpy.zeros(0)
    return numpy.vstack(blocks), numpy.concatenate(ys)


def estimate_batch(dataset, spectrum, coeffs, offsets, rank_tol=STAGE1_RANK_TOL):
    steady = dataset.steady_records
    if not steady:
        raise InsufficientData("stage1", "no samples at or after t_settle={}".format(dataset.t_settle))
    Gamma, y = regressor_matrix(spectrum, coeffs, steady, offsets)
    sol = lstsq_pivoted(Gamma, y, rank_tol)
    if not sol.rank_ok:
        errorlog.add_entry("stage1", "batch", "regressor rank {} < {}; estimate is not unique".format(
            sol.rank, Gamma.shape[1]), ErrorLog.WARN)
    m_y = offsets[-1][1]
    return BatchEstimate(InterpolationVector(sol.x, m_y, spectrum), sol.rank_ok, sol.residual, sol.cond, len(steady))


class RlsState(object):
    def __init__(self, eta, P, k=0):
        self.eta = numpy.array(eta, dtype=float)
        self.P = numpy.array(P, dtype=float)
        self.k = k

    def estimate(self, spectrum, m_y):
        return InterpolationVector(self.eta.copy(), m_y, spectrum)


def rls_init(d, p0_scale=DEFAULT_P0):
    return RlsState(numpy.zeros(d), p0_scale * numpy.eye(d))


def rls_update(state, sample, spectrum, coeffs, offsets, t_settle=0.0):
    if sample.t < t_settle:
        raise PreSettlingSample("t={}".format(sample.t), "sample precedes t_settle={}".format(t_settle))
    G = regressor_row(spectrum, coeffs, sample, offsets)
    y = numpy.asarray(sample.y, dtype=float)
    P = state.P
    PGt = P @ G.T
    S = G @ PGt + numpy.eye(G.shape[0])
    K = scipy.linalg.solve(S, PGt.T, assume_a="pos").T
    state.eta = state.eta + K @ (y - G @ state.eta)
    P = (numpy.eye(P.shape[0]) - K @ G) @ P
    state.P = 0.5 * (P + P.T)
    state.k += 1
    return state


def estimate_rls(dataset, spectrum, coeffs, offsets, p0_scale=DEFAULT_P0, snapshots=()):
    """Folds rls_update over the steady-state records.

    Returns the final state and a dict of estimates taken after each sample
    count listed in `snapshots`.
    """
    steady = dataset.steady_records
    if not steady:
        raise InsufficientData("stage1", "no samples at or after t_settle={}".format(dataset.t_settle))
    m_y = offsets[-1][1]
    state = rls_init(spectrum.d * m_y, p0_scale)
    wanted = set(int(n) for n in snapshots)
    taken = {}
    for rec in steady:
        rls_update(state, rec, spectrum, coeffs, offsets, dataset.t_settle)
        if state.k in wanted:
            taken[state.k] = state.estimate(spectrum, m_y)
    return state, taken


def oracle_eta(nds, spectrum):
    """Exact interpolations H(lambda_i) pi_i at the generator eigenvalues."""
    m_y = nds.m_y
    eta_r = numpy.zeros((m_y, spectrum.m_r))
    eta_c = numpy.zeros((m_y, spectrum.m_c), dtype=complex)
    for i, lam in enumerate(spectrum.lambda_r):
        eta_r[:, i] = (transfer_eval(nds, lam) @ spectrum.pi_r[:, i]).real
    for i, lam in enumerate(spectrum.lambda_c):
        eta_c[:, i] = transfer_eval(nds, lam) @ spectrum.pi_c[:, i]
    return InterpolationVector.from_columns(eta_r, eta_c, spectrum)


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

from __future__ import print_function

from collections import namedtuple

import numpy
import scipy.linalg

from .errorlog import errorlog, ErrorLog
from .generator import analyze_generator, coefficients
from .simulate import solve_sylvester
from .utils import lstsq_pivoted, unvec, vec


IMAG_RESIDUE_TOL = 1e-8

ProjectionSet = namedtuple("ProjectionSet", ["M", "N", "Q", "U_M2", "U_N2", "U_Q2", "r_M", "r_N", "r_Q", "rank_tol"])
XSystem = namedtuple("XSystem", ["Gamma", "gamma"])
XEstimate = namedtuple("XEstimate", ["X_top", "X_btm", "rank_ok", "cond", "residual"])
ThetaSystem = namedtuple("ThetaSystem", ["Psi", "kappa"])
ThetaEstimate = namedtuple("ThetaEstimate", ["theta_hat", "rank_ok", "cond", "residual"])
IdentifiabilityReport = namedtuple("IdentifiabilityReport", ["stage1_pe_hint", "gamma_rank_ok", "gamma_cond", "psi_rank_at_truth", "psi_cond"])


class Stage2Report(object):
    def __init__(self, Yss_hat, x_est, theta_est, projections, imag_residue=0.0):
        self.Yss_hat = Yss_hat
        self.X_top = x_est.X_top
        self.X_btm = x_est.X_btm
        self.theta_hat = theta_est.theta_hat
        self.gamma_rank_ok = x_est.rank_ok
        self.gamma_cond = x_est.cond
        self.gamma_residual = x_est.residual
        self.psi_rank_ok = theta_est.rank_ok
        self.psi_cond = theta_est.cond
        self.psi_residual = theta_est.residual
        self.projections = projections
        self.imag_residue = imag_residue

    @property
    def X_hat(self):
        return numpy.vstack([self.X_top, self.X_btm])

    @property
    def identifiable(self):
        return self.gamma_rank_ok and self.psi_rank_ok


def yss_from_eta(eta_hat, spectrum, return_residue=False):
    """Rebuilds Y_ss = [R C] (W T)^-1 from the packed interpolations.

    Any imaginary residue above IMAG_RESIDUE_TOL (relative to the real part)
    is logged and dropped.
    """
    eta_r = eta_hat.eta_r
    eta_c = eta_hat.eta_c
    m_y = eta_hat.m_y
    cols = numpy.zeros((m_y, spectrum.m_xi), dtype=complex)
    m_r = spectrum.m_r
    cols[:, :m_r] = eta_r
    cols[:, m_r::2] = eta_c
    cols[:, m_r + 1::2] = numpy.conj(eta_c)
    if spectrum.m_xi:
        Y = scipy.linalg.solve(spectrum.transform.T, cols.T).T
    else:
        Y = cols
    residue = float(numpy.linalg.norm(Y.imag) / max(numpy.linalg.norm(Y.real), 1.0))
    if residue > IMAG_RESIDUE_TOL:
        errorlog.add_entry("stage2", "yss_from_eta", "imaginary residue {:.3g} dropped".format(residue), ErrorLog.WARN)
    if return_residue:
        return Y.real, residue
    return Y.real


def left_null_space(A, rank_tol=None):
    """Orthonormal basis of the left null space of A, and the rank of A.

    A zero (or zero-width) matrix has the whole space as its left null space.
    """
    A = numpy.atleast_2d(numpy.asarray(A, dtype=float))
    m, n = A.shape
    if n == 0 or not numpy.any(A):
        return numpy.eye(m), 0
    U, s, _ = scipy.linalg.svd(A, full_matrices=True)
    tol = max(m, n) * numpy.finfo(float).eps if rank_tol is None else rank_tol
    rank = int(numpy.sum(s > tol * s[0]))
    return U[:, rank:], rank


def parameter_coefficients(nds):
    """M, N, Q: the Phi_i-dependent blocks concatenated over the basis."""
    basis = nds.topology.basis
    if not basis:
        return (numpy.zeros((nds.m_x, 0)), numpy.zeros((nds.m_z, 0)), numpy.zeros((nds.m_y, 0)))
    M = numpy.hstack([nds.B_xv @ P for P in basis])
    N = numpy.hstack([nds.D_zv @ P for P in basis])
    Q = numpy.hstack([nds.D_yv @ P for P in basis])
    return M, N, Q


def build_projections(nds, rank_tol=None):
    M, N, Q = parameter_coefficients(nds)
    U_M2, r_M = left_null_space(M, rank_tol)
    U_N2, r_N = left_null_space(N, rank_tol)
    U_Q2, r_Q = left_null_space(Q, rank_tol)
    return ProjectionSet(M, N, Q, U_M2, U_N2, U_Q2, r_M, r_N, r_Q, rank_tol)


def _scales(group_scales):
    if group_scales is None:
        return (1.0, 1.0, 1.0)
    return tuple(float(g) for g in group_scales)


def build_x_system(nds, gen, proj, yss_hat, group_scales=None):
    """Linear system Gamma vec([X_top; X_btm]) = gamma with the theta terms projected out.

    The unknown is [vec(X_top); vec(X_btm)].
    """
    g1, g2, g3 = _scales(group_scales)
    I = numpy.eye(gen.m_xi)
    phi0 = nds.topology.phi0
    UM, UN, UQ = proj.U_M2.T, proj.U_N2.T, proj.U_Q2.T
    Pi = gen.Pi
    Gamma = numpy.vstack([
        g1 * numpy.hstack([
            numpy.kron(I, UM @ nds.A_xx) - numpy.kron(gen.Xi.T, UM @ nds.E),
            numpy.kron(I, UM @ nds.B_xv @ phi0),
        ]),
        g2 * numpy.hstack([
            numpy.kron(I, UN @ nds.C_zx),
            numpy.kron(I, UN @ (nds.D_zv @ phi0 - numpy.eye(nds.m_z))),
        ]),
        g3 * numpy.hstack([
            numpy.kron(I, UQ @ nds.C_yx),
            numpy.kron(I, UQ @ nds.D_yv @ phi0),
        ]),
    ])
    gamma = numpy.concatenate([
        -g1 * vec(UM @ nds.B_xu @ Pi),
        -g2 * vec(UN @ nds.D_zu @ Pi),
        g3 * vec(UQ @ (yss_hat - nds.D_yu @ Pi)),
    ])
    return XSystem(Gamma, gamma)


def estimate_x(Gamma, gamma, m_x, m_z, m_xi, rank_tol=None):
    sol = lstsq_pivoted(Gamma, gamma, rank_tol)
    split = m_x * m_xi
    X_top = unvec(sol.x[:split], m_x, m_xi)
    X_btm = unvec(sol.x[split:], m_z, m_xi)
    return XEstimate(X_top, X_btm, sol.rank_ok, sol.cond, sol.residual)


def build_theta_system(nds, gen, X_top, X_btm, yss_hat, group_scales=None):
    """Psi theta = kappa from the dynamics, internal and output equations at X_hat."""
    g1, g2, g3 = _scales(group_scales)
    phi0 = nds.topology.phi0
    basis = nds.topology.basis
    Pi = gen.Pi
    cols = []
    for P in basis:
        PX = P @ X_btm
        cols.append(numpy.concatenate([
            g1 * vec(nds.B_xv @ PX),
            g2 * vec(nds.D_zv @ PX),
            g3 * vec(nds.D_yv @ PX),
        ]))
    kappa = numpy.concatenate([
        g1 * vec(nds.E @ X_top @ gen.Xi - nds.A_xx @ X_top - nds.B_xv @ phi0 @ X_btm - nds.B_xu @ Pi),
        g2 * vec(X_btm - nds.C_zx @ X_top - nds.D_zv @ phi0 @ X_btm - nds.D_zu @ Pi),
        g3 * vec(yss_hat - nds.C_yx @ X_top - nds.D_yv @ phi0 @ X_btm - nds.D_yu @ Pi),
    ])
    if cols:
        Psi = numpy.column_stack(cols)
    else:
        Psi = numpy.zeros((kappa.size, 0))
    return ThetaSystem(Psi, kappa)


def estimate_theta(Psi, kappa, rank_tol=None):
    sol = lstsq_pivoted(Psi, kappa, rank_tol)
    return ThetaEstimate(sol.x, sol.rank_ok, sol.cond, sol.residual)


def identify_stage2(nds, gen, spectrum, eta_hat, rank_tol=None, group_scales=None):
    """Feed-forward Stage 2: eta_hat -> Y_ss -> X_hat -> theta_hat.

    Only the known parts of `nds` are used; its stored theta is ignored.
    """
    yss_hat, residue = yss_from_eta(eta_hat, spectrum, return_residue=True)
    proj = build_projections(nds, rank_tol)
    xs = build_x_system(nds, gen, proj, yss_hat, group_scales)
    x_est = estimate_x(xs.Gamma, xs.gamma, nds.m_x, nds.m_z, gen.m_xi, rank_tol)
    if not x_est.rank_ok:
        errorlog.add_entry("stage2", "Gamma", "Gamma lacks full column rank (cond={:.3g})".format(x_est.cond), ErrorLog.WARN)
    ts = build_theta_system(nds, gen, x_est.X_top, x_est.X_btm, yss_hat, group_scales)
    theta_est = estimate_theta(ts.Psi, ts.kappa, rank_tol)
    if not theta_est.rank_ok:
        errorlog.add_entry("stage2", "Psi", "Psi lacks full column rank (cond={:.3g})".format(theta_est.cond), ErrorLog.WARN)
    return Stage2Report(yss_hat, x_est, theta_est, proj, residue)


def identifiability_report(nds, gen, rank_tol=None, sol=None):
    """Rank conditions of Gamma and Psi(X_true) for a model with known true theta."""
    if sol is None:
        sol = solve_sylvester(nds, gen)
    spectrum = analyze_generator(gen)
    coeffs = coefficients(gen, spectrum)
    pe_hint = bool(numpy.all(coeffs.alpha != 0) and numpy.all(coeffs.amplitude > 0))
    proj = build_projections(nds, rank_tol)
    xs = build_x_system(nds, gen, proj, sol.Yss)
    x_est = estimate_x(xs.Gamma, xs.gamma, nds.m_x, nds.m_z, gen.m_xi, rank_tol)
    ts = build_theta_system(nds, gen, sol.X_top, sol.X_btm, sol.Yss)
    theta_est = estimate_theta(ts.Psi, ts.kappa, rank_tol)
    return IdentifiabilityReport(pe_hint, x_est.rank_ok, x_est.cond, theta_est.rank_ok, theta_est.cond)


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

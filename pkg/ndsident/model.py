from __future__ import print_function

import math
from collections import namedtuple

import numpy
import scipy.linalg

from .errors import DimensionError, EvaluationError, WellPosednessError, UnsupportedDescriptorSimulation
from .utils import as_matrix, frozen, svd_rank


Diagnostics = namedtuple("Diagnostics", ["wellposed", "regular_pencil", "stable", "settling_bound", "finite_eigenvalues"])

DEFAULT_SETTLE_FRACTION = 1e-3
REGULARITY_PROBES = 5


class DescriptorSubsystem(object):
    """One node of the network in descriptor form.

        E x' = A_xx x + B_xv v + B_xu u
        z    = C_zx x + D_zv v + D_zu u
        y    = C_yx x + D_yv v + D_yu u

    Missing blocks are zero.  Signal dimensions are taken from `dims`
    (m_x, m_v, m_u, m_z, m_y) when given, otherwise inferred from whichever
    blocks carry them; any dimension may be zero.
    """
    BLOCKS = ("A_xx", "B_xv", "B_xu", "C_zx", "D_zv", "D_zu", "C_yx", "D_yv", "D_yu")
    # block name: (row dim, col dim)
    BLOCK_DIMS = {
        "A_xx": ("m_x", "m_x"),
        "B_xv": ("m_x", "m_v"),
        "B_xu": ("m_x", "m_u"),
        "C_zx": ("m_z", "m_x"),
        "D_zv": ("m_z", "m_v"),
        "D_zu": ("m_z", "m_u"),
        "C_yx": ("m_y", "m_x"),
        "D_yv": ("m_y", "m_v"),
        "D_yu": ("m_y", "m_u"),
    }

    def __init__(self, E, A_xx=None, B_xv=None, B_xu=None, C_zx=None, D_zv=None, D_zu=None,
                 C_yx=None, D_yv=None, D_yu=None, dims=None):
        given = dict(A_xx=A_xx, B_xv=B_xv, B_xu=B_xu, C_zx=C_zx, D_zv=D_zv, D_zu=D_zu,
                     C_yx=C_yx, D_yv=D_yv, D_yu=D_yu)
        E = as_matrix(E)
        if dims is not None:
            names = ("m_x", "m_v", "m_u", "m_z", "m_y")
            sizes = dict(zip(names, (int(d) for d in dims)))
        else:
            sizes = {"m_x": E.shape[0]}
            for name in self.BLOCKS:
                if given[name] is None:
                    continue
                mat = numpy.array(given[name], dtype=float)
                if mat.ndim != 2:
                    continue
                rdim, cdim = self.BLOCK_DIMS[name]
                sizes.setdefault(rdim, mat.shape[0])
                sizes.setdefault(cdim, mat.shape[1])
            for name in ("m_v", "m_u", "m_z", "m_y"):
                sizes.setdefault(name, 0)
        self.m_x = sizes["m_x"]
        self.m_v = sizes["m_v"]
        self.m_u = sizes["m_u"]
        self.m_z = sizes["m_z"]
        self.m_y = sizes["m_y"]
        self.E = frozen(E)
        for name in self.BLOCKS:
            rdim, cdim = self.BLOCK_DIMS[name]
            rows, cols = getattr(self, rdim), getattr(self, cdim)
            if given[name] is None:
                mat = numpy.zeros((rows, cols))
            else:
                mat = as_matrix(given[name], rows, cols)
            setattr(self, name, frozen(mat))

    @property
    def dims(self):
        return (self.m_x, self.m_v, self.m_u, self.m_z, self.m_y)

    def check_shapes(self, index=None):
        where = "subsystem {}".format(index) if index is not None else "subsystem"
        if self.E.shape != (self.m_x, self.m_x):
            raise DimensionError(where, "E must be {0}x{0}, got {1}".format(self.m_x, self.E.shape))
        for name in self.BLOCKS:
            rdim, cdim = self.BLOCK_DIMS[name]
            want = (getattr(self, rdim), getattr(self, cdim))
            got = getattr(self, name).shape
            if got != want:
                raise DimensionError(where, "{} must be {}x{}, got {}x{}".format(name, want[0], want[1], got[0], got[1]))

    def matrices(self):
        out = {"E": self.E}
        for name in self.BLOCKS:
            out[name] = getattr(self, name)
        return out


class Topology(object):
    """Affine interconnection v = Phi(theta) z with Phi(theta) = Phi_0 + sum theta_i Phi_i.
    """

    def __init__(self, phi0, basis=(), theta=None, bounds=None):
        self.phi0 = frozen(as_matrix(phi0))
        self.basis = tuple(frozen(as_matrix(b, *self.phi0.shape)) for b in basis)
        for i, b in enumerate(self.basis):
            if b.shape != self.phi0.shape:
                raise DimensionError("basis {}".format(i + 1), "shape {} differs from phi0 shape {}".format(b.shape, self.phi0.shape))
        m_theta = len(self.basis)
        if theta is None:
            theta = numpy.zeros(m_theta)
        self.theta = frozen(numpy.asarray(theta, dtype=float).reshape(-1))
        if self.theta.size != m_theta:
            raise DimensionError("theta", "length {} does not match {} basis matrices".format(self.theta.size, m_theta))
        if bounds is None:
            bounds = [(-math.inf, math.inf)] * m_theta
        self.bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if len(self.bounds) != m_theta:
            raise DimensionError("bounds", "expected {} intervals, got {}".format(m_theta, len(self.bounds)))
        for i, (val, (lo, hi)) in enumerate(zip(self.theta, self.bounds)):
            if not lo <= val <= hi:
                raise DimensionError("theta[{}]".format(i), "value {} outside admissible interval [{}, {}]".format(val, lo, hi))

    @property
    def m_theta(self):
        return len(self.basis)

    @property
    def shape(self):
        return self.phi0.shape

    def with_theta(self, theta, check_bounds=True):
        bounds = self.bounds if check_bounds else None
        return Topology(self.phi0, self.basis, theta, bounds)


def phi_of_theta(topology, theta):
    theta = numpy.asarray(theta, dtype=float).reshape(-1)
    if theta.size != topology.m_theta:
        raise DimensionError("theta", "length {} does not match m_theta={}".format(theta.size, topology.m_theta))
    phi = numpy.array(topology.phi0, dtype=float)
    for th, b in zip(theta, topology.basis):
        phi = phi + th * b
    return phi


class NdsModel(object):
    """The assembled network: block-diagonal stacks plus the derived pencil.

    Build with assemble_nds(); instances are read-only.
    """
    STACKS = ("E",) + DescriptorSubsystem.BLOCKS

    def __init__(self, subsystems, topology, stacks):
        self.subsystems = tuple(subsystems)
        self.topology = topology
        for name in self.STACKS:
            setattr(self, name, frozen(stacks[name]))
        self.m_x = self.E.shape[0]
        self.m_v = self.B_xv.shape[1]
        self.m_u = self.B_xu.shape[1]
        self.m_z = self.C_zx.shape[0]
        self.m_y = self.C_yx.shape[0]
        offsets = []
        pos = 0
        for sub in self.subsystems:
            offsets.append((pos, pos + sub.m_y))
            pos += sub.m_y
        self.y_offsets = tuple(offsets)

        phi = phi_of_theta(topology, topology.theta)
        self.phi = frozen(phi)
        m_x, m_z = self.m_x, self.m_z
        E_bar = numpy.zeros((m_x + m_z, m_x + m_z))
        E_bar[:m_x, :m_x] = self.E
        self.E_bar = frozen(E_bar)
        self.A_theta = frozen(numpy.block([
            [self.A_xx, self.B_xv @ phi],
            [self.C_zx, self.D_zv @ phi - numpy.eye(m_z)],
        ]))
        self.C_theta = frozen(numpy.hstack([self.C_yx, self.D_yv @ phi]))
        self.B_stack = frozen(numpy.vstack([self.B_xu, self.D_zu]))

    @property
    def theta(self):
        return self.topology.theta

    @property
    def n_subsystems(self):
        return len(self.subsystems)

    def selection(self, k):
        start, stop = self.y_offsets[k]
        S = numpy.zeros((stop - start, self.m_y))
        S[:, start:stop] = numpy.eye(stop - start)
        return S

    def with_theta(self, theta, check_bounds=True):
        return assemble_nds(self.subsystems, self.topology.with_theta(theta, check_bounds))


def assemble_nds(subsystems, topology):
    subsystems = list(subsystems)
    if not subsystems:
        raise DimensionError("subsystems", "at least one subsystem is required")
    for i, sub in enumerate(subsystems):
        sub.check_shapes(i)
    stacks = {}
    for name in NdsModel.STACKS:
        stacks[name] = scipy.linalg.block_diag(*[getattr(sub, name) for sub in subsystems])
    m_v = sum(sub.m_v for sub in subsystems)
    m_z = sum(sub.m_z for sub in subsystems)
    if topology.shape != (m_v, m_z):
        raise DimensionError("topology", "phi0 is {}x{} but the subsystems need {}x{} (m_v x m_z)".format(
            topology.shape[0], topology.shape[1], m_v, m_z))
    # block_diag of all-empty blocks collapses to shape (1, 0); fix up zero dims
    dims = {"m_x": sum(s.m_x for s in subsystems), "m_v": m_v, "m_u": sum(s.m_u for s in subsystems),
            "m_z": m_z, "m_y": sum(s.m_y for s in subsystems)}
    shapes = dict(DescriptorSubsystem.BLOCK_DIMS, E=("m_x", "m_x"))
    for name in NdsModel.STACKS:
        rdim, cdim = shapes[name]
        want = (dims[rdim], dims[cdim])
        if stacks[name].shape != want:
            stacks[name] = numpy.zeros(want)
    return NdsModel(subsystems, topology, stacks)


def pencil_eigenvalues(nds):
    """Finite generalized eigenvalues of (E_bar, A_theta), plus a flag for 0/0 pairs.
    """
    n = nds.A_theta.shape[0]
    if n == 0:
        return numpy.zeros(0, dtype=complex), False
    w = scipy.linalg.eigvals(nds.A_theta, nds.E_bar, homogeneous_eigvals=True)
    alpha, beta = w[0], w[1]
    scale = max(numpy.linalg.norm(nds.A_theta, 1), numpy.linalg.norm(nds.E_bar, 1), 1.0)
    tol = 1e-12 * scale
    singular = bool(numpy.any((numpy.abs(alpha) <= tol) & (numpy.abs(beta) <= tol)))
    finite = numpy.abs(beta) > 1e-12 * (numpy.abs(alpha) + numpy.abs(beta))
    return alpha[finite] / beta[finite], singular


def check_regularity(nds, settle_fraction=DEFAULT_SETTLE_FRACTION, t_settle=None, seed=0):
    m_z = nds.m_z
    wellposed = True
    if m_z:
        rank, _, _ = svd_rank(numpy.eye(m_z) - nds.D_zv @ nds.phi)
        wellposed = rank == m_z

    rng = numpy.random.default_rng(seed)
    probes = rng.normal(size=REGULARITY_PROBES) + 1j * rng.normal(size=REGULARITY_PROBES)
    singular_at_all = True
    for s in probes:
        pencil = s * nds.E_bar - nds.A_theta
        if pencil.size == 0:
            singular_at_all = False
            break
        sv = scipy.linalg.svdvals(pencil)
        if sv[-1] > 1e-12 * sv[0]:
            singular_at_all = False
            break
    eigs, zero_pair = pencil_eigenvalues(nds)
    regular = not singular_at_all and not zero_pair

    stable = bool(regular and numpy.all(eigs.real < 0))
    settling = None
    if t_settle is not None:
        settling = float(t_settle)
    elif stable:
        if eigs.size:
            settling = float(numpy.max(-math.log(settle_fraction) / numpy.abs(eigs.real)))
        else:
            settling = 0.0
    return Diagnostics(wellposed, regular, stable, settling, eigs)


def transfer_eval(nds, s):
    """H(s) = C_theta (s E_bar - A_theta)^-1 [B_xu; D_zu] + D_yu.
    """
    s = complex(s)
    pencil = s * nds.E_bar - nds.A_theta
    if pencil.size == 0:
        return numpy.array(nds.D_yu, dtype=complex)
    if numpy.linalg.cond(pencil) > 1.0 / numpy.finfo(float).eps:
        raise EvaluationError(s)
    try:
        sol = scipy.linalg.solve(pencil, nds.B_stack.astype(complex))
    except scipy.linalg.LinAlgError:
        raise EvaluationError(s)
    return nds.C_theta @ sol + nds.D_yu


def interconnection_gain(nds):
    """W = (I - D_zv Phi)^-1, or WellPosednessError."""
    m_z = nds.m_z
    lhs = numpy.eye(m_z) - nds.D_zv @ nds.phi
    rank, _, _ = svd_rank(lhs)
    if rank < m_z:
        raise WellPosednessError("I - D_zv Phi", "interconnection is not well-posed")
    return scipy.linalg.inv(lhs) if m_z else numpy.zeros((0, 0))


def eliminated_realization(nds):
    """Eliminates z and returns (A_e, B_e, C_e, D_e) of x' = A_e x + B_e u, y = C_e x + D_e u.
    """
    W = interconnection_gain(nds)
    rank, _, _ = svd_rank(nds.E)
    if rank < nds.m_x:
        raise UnsupportedDescriptorSimulation("E", "E is singular; use steady-state sampling instead")
    phiW = nds.phi @ W
    A_e = scipy.linalg.solve(nds.E, nds.A_xx + nds.B_xv @ phiW @ nds.C_zx)
    B_e = scipy.linalg.solve(nds.E, nds.B_xu + nds.B_xv @ phiW @ nds.D_zu)
    C_e = nds.C_yx + nds.D_yv @ phiW @ nds.C_zx
    D_e = nds.D_yu + nds.D_yv @ phiW @ nds.D_zu
    return A_e, B_e, C_e, D_e


def subsystem_transfer(nds, s, out="y", inp="v"):
    """Open-interconnection transfer matrix G_out,inp(s) of the stacked subsystems.

    `out` is "y" or "z", `inp` is "u" or "v".
    """
    C = {"y": nds.C_yx, "z": nds.C_zx}[out]
    B = {"u": nds.B_xu, "v": nds.B_xv}[inp]
    D = getattr(nds, "D_{}{}".format(out, inp))
    s = complex(s)
    resolvent = scipy.linalg.solve(s * nds.E - nds.A_xx, B.astype(complex))
    return C @ resolvent + D


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

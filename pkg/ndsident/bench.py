from __future__ import print_function

import math
from collections import namedtuple

import numpy
import scipy.linalg

from .errorlog import errorlog, ErrorLog
from .errors import ConfigError, NdsIdentException
from .model import DescriptorSubsystem, Topology, assemble_nds, subsystem_transfer
from .simulate import solve_sylvester
from .stage1 import InterpolationVector
from .utils import svd_rank


RelativeErrors = namedtuple("RelativeErrors", ["e_eta", "e_theta"])
NlsResult = namedtuple("NlsResult", ["theta_nls", "iterations", "final_cost", "trajectory", "converged", "evaluations", "penalty_hits"])


class ChainSpec(object):
    """Spring-mass-damper chain with one coupling (k_m, mu_m) left unknown."""

    def __init__(self, n_carts=6, mass_range=(1.0, 1.5), spring_range=(0.5, 2.0), damper_range=(0.1, 0.5),
                 unknown_coupling=None, wall_anchoring=True, split_forces=True, seed=0):
        self.n_carts = int(n_carts)
        self.mass_range = tuple(float(x) for x in mass_range)
        self.spring_range = tuple(float(x) for x in spring_range)
        self.damper_range = tuple(float(x) for x in damper_range)
        if unknown_coupling is None:
            unknown_coupling = int(math.ceil(self.n_carts / 2.0))
        self.unknown_coupling = int(unknown_coupling)
        self.wall_anchoring = bool(wall_anchoring)
        self.split_forces = bool(split_forces)
        self.seed = seed

    def validate(self):
        if self.n_carts < 2:
            raise ConfigError("chain.n_carts", "need at least 2 carts")
        if not 1 <= self.unknown_coupling <= self.n_carts - 1:
            raise ConfigError("chain.unknown_coupling", "must lie in 1..{}".format(self.n_carts - 1))
        for name in ("mass_range", "spring_range", "damper_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ConfigError("chain.{}".format(name), "bounds must be positive and ordered, got ({}, {})".format(lo, hi))

    def as_dict(self):
        return {
            "n_carts": self.n_carts, "mass_range": list(self.mass_range),
            "spring_range": list(self.spring_range), "damper_range": list(self.damper_range),
            "unknown_coupling": self.unknown_coupling, "wall_anchoring": self.wall_anchoring,
            "split_forces": self.split_forces, "seed": self.seed,
        }


class ChainModel(object):
    def __init__(self, subsystems, topology, theta_true, params):
        self.subsystems = subsystems
        self.topology = topology
        self.theta_true = theta_true
        self.params = params

    @property
    def n_carts(self):
        return len(self.subsystems)

    def nds(self):
        return assemble_nds(self.subsystems, self.topology)


def _cart(mass, with_input, with_output, split_forces):
    m_v = 2 if split_forces else 1
    return DescriptorSubsystem(
        E=[[1.0, 0.0], [0.0, mass]],
        A_xx=[[0.0, 1.0], [0.0, 0.0]],
        B_xv=[[0.0] * m_v, [1.0] * m_v],
        B_xu=[[0.0], [1.0]] if with_input else None,
        C_zx=numpy.eye(2),
        C_yx=[[1.0, 0.0]] if with_output else None,
        dims=(2, m_v, 1 if with_input else 0, 2, 1 if with_output else 0),
    )


def build_chain_from_parameters(masses, springs, dampers, wall_springs=None, wall_dampers=None,
                                unknown_coupling=1, split_forces=True):
    """Chain with carts 1..n, coupling j joining carts j and j+1.

    Input forces act on the end carts and their positions are the outputs.
    Coupling `unknown_coupling` (1-based) moves into the basis as
    theta = (k_m, mu_m); everything else is folded into phi0.
    """
    masses = [float(m) for m in masses]
    n = len(masses)
    springs = [float(k) for k in springs]
    dampers = [float(c) for c in dampers]
    if len(springs) != n - 1 or len(dampers) != n - 1:
        raise ConfigError("chain", "need {} springs and dampers for {} carts".format(n - 1, n))
    if not 1 <= unknown_coupling <= n - 1:
        raise ConfigError("chain.unknown_coupling", "must lie in 1..{}".format(n - 1))
    ends = (0, n - 1)
    subsystems = [_cart(m, i in ends, i in ends, split_forces) for i, m in enumerate(masses)]

    m_v = 2 * n if split_forces else n
    if split_forces:
        elastic = lambda i: 2 * i
        viscous = lambda i: 2 * i + 1
    else:
        elastic = viscous = lambda i: i
    pos = lambda i: 2 * i
    vel = lambda i: 2 * i + 1

    def couple(phi, a, b, k, c):
        for me, other in ((a, b), (b, a)):
            phi[elastic(me), pos(me)] -= k
            phi[elastic(me), pos(other)] += k
            phi[viscous(me), vel(me)] -= c
            phi[viscous(me), vel(other)] += c

    phi0 = numpy.zeros((m_v, 2 * n))
    unknown = unknown_coupling - 1
    for j in range(n - 1):
        if j != unknown:
            couple(phi0, j, j + 1, springs[j], dampers[j])
    if wall_springs is not None:
        for cart, k, c in zip(ends, wall_springs, wall_dampers):
            phi0[elastic(cart), pos(cart)] -= k
            phi0[viscous(cart), vel(cart)] -= c
    phi_k = numpy.zeros_like(phi0)
    couple(phi_k, unknown, unknown + 1, 1.0, 0.0)
    phi_c = numpy.zeros_like(phi0)
    couple(phi_c, unknown, unknown + 1, 0.0, 1.0)
    theta = numpy.array([springs[unknown], dampers[unknown]])
    topology = Topology(phi0, [phi_k, phi_c], theta, [(0.0, math.inf), (0.0, math.inf)])
    params = {
        "masses": masses, "springs": springs, "dampers": dampers,
        "wall_springs": None if wall_springs is None else [float(k) for k in wall_springs],
        "wall_dampers": None if wall_dampers is None else [float(c) for c in wall_dampers],
        "unknown_coupling": unknown_coupling, "split_forces": split_forces,
    }
    return ChainModel(subsystems, topology, theta, params)


def build_chain(spec):
    spec.validate()
    rng = numpy.random.Generator(numpy.random.Philox(numpy.random.SeedSequence(spec.seed)))
    n = spec.n_carts
    masses = rng.uniform(*spec.mass_range, size=n)
    springs = rng.uniform(*spec.spring_range, size=n - 1)
    dampers = rng.uniform(*spec.damper_range, size=n - 1)
    wall_springs = rng.uniform(*spec.spring_range, size=2)
    wall_dampers = rng.uniform(*spec.damper_range, size=2)
    if not spec.wall_anchoring:
        wall_springs = wall_dampers = None
    return build_chain_from_parameters(
        masses, springs, dampers, wall_springs, wall_dampers,
        spec.unknown_coupling, spec.split_forces,
    )


def chain_energy(chain, x):
    """Kinetic plus spring energy of the chain at state x = [p_1, q_1, ..., p_n, q_n]."""
    x = numpy.asarray(x, dtype=float)
    p, q = x[0::2], x[1::2]
    masses = numpy.array(chain.params["masses"])
    springs = numpy.array(chain.params["springs"])
    energy = 0.5 * numpy.sum(masses * q ** 2) + 0.5 * numpy.sum(springs * numpy.diff(p) ** 2)
    walls = chain.params["wall_springs"]
    if walls is not None:
        energy += 0.5 * (walls[0] * p[0] ** 2 + walls[1] * p[-1] ** 2)
    return float(energy)


def rank_audit(nds, points=None, seed=0, n_points=3):
    """Normal-rank estimates of G_yv and G_zu at random complex points."""
    if points is None:
        rng = numpy.random.default_rng(seed)
        points = rng.normal(size=n_points) + 1j * rng.normal(size=n_points)
    ranks = {"G_yv": 0, "G_zu": 0}
    for s in points:
        ranks["G_yv"] = max(ranks["G_yv"], svd_rank(subsystem_transfer(nds, s, "y", "v"), 1e-10)[0])
        ranks["G_zu"] = max(ranks["G_zu"], svd_rank(subsystem_transfer(nds, s, "z", "u"), 1e-10)[0])
    ranks["m_v"] = nds.m_v
    ranks["m_z"] = nds.m_z
    return ranks


def relative_error(x_hat, x, context="relative_error"):
    """sqrt(sum(((x_hat_i - x_i) / x_i)^2)) over components with nonzero x_i."""
    if isinstance(x_hat, InterpolationVector):
        x_hat = x_hat.eta_bar
    if isinstance(x, InterpolationVector):
        x = x.eta_bar
    x_hat = numpy.asarray(x_hat, dtype=float).reshape(-1)
    x = numpy.asarray(x, dtype=float).reshape(-1)
    if x_hat.shape != x.shape:
        raise ConfigError(context, "length {} != {}".format(x_hat.size, x.size))
    if x.size == 0:
        return 0.0
    keep = numpy.abs(x) > 1e-12 * numpy.max(numpy.abs(x))
    skipped = int(x.size - numpy.count_nonzero(keep))
    if skipped:
        errorlog.add_entry("bench", context, "skipped {} zero true components".format(skipped), ErrorLog.WARN)
    ratio = (x_hat[keep] - x[keep]) / x[keep]
    return float(numpy.sqrt(numpy.sum(ratio ** 2)))


def relative_errors(eta_hat, eta_true, theta_hat, theta_true):
    return RelativeErrors(
        relative_error(eta_hat, eta_true, "e_eta"),
        relative_error(theta_hat, theta_true, "e_theta"),
    )


def draw_initial_theta(theta_true, level, rng):
    """A start point whose relative error against theta_true is exactly `level`."""
    theta_true = numpy.asarray(theta_true, dtype=float)
    d = rng.standard_normal(theta_true.size)
    d /= numpy.linalg.norm(d)
    return theta_true * (1.0 + level * d)


class NlsOptions(object):
    def __init__(self, max_iterations=100, xtol=1e-10, ftol=1e-12, lambda0=1e-3, penalty=1e12, lambda_max=1e16):
        self.max_iterations = int(max_iterations)
        self.xtol = float(xtol)
        self.ftol = float(ftol)
        self.lambda0 = float(lambda0)
        self.penalty = float(penalty)
        self.lambda_max = float(lambda_max)


class SteadyPredictor(object):
    """Residuals y - S_k Yss(theta) xi(t) over the steady-state records.

    xi(t) is computed once per record, so a new theta only costs one
    Sylvester solve.
    """

    def __init__(self, dataset, model_template, gen):
        self.model = model_template
        self.gen = gen
        records = dataset.steady_records
        xi = [scipy.linalg.expm(gen.Xi * r.t) @ gen.xi0 for r in records]
        self.xi = numpy.column_stack(xi) if xi else numpy.zeros((gen.m_xi, 0))
        rows, cols, ys = [], [], []
        for j, r in enumerate(records):
            start, stop = model_template.y_offsets[r.subsystem]
            rows.extend(range(start, stop))
            cols.extend([j] * (stop - start))
            ys.append(numpy.asarray(r.y, dtype=float))
        self.rows = numpy.array(rows, dtype=int)
        self.cols = numpy.array(cols, dtype=int)
        self.y = numpy.concatenate(ys) if ys else numpy.zeros(0)
        self.evaluations = 0

    def residual(self, theta):
        """Residual vector, or None when the model is not solvable at theta."""
        self.evaluations += 1
        try:
            nds = self.model.with_theta(theta, check_bounds=False)
            sol = solve_sylvester(nds, self.gen)
        except (NdsIdentException, scipy.linalg.LinAlgError):
            return None
        pred = (sol.Yss @ self.xi)[self.rows, self.cols]
        r = self.y - pred
        if not numpy.all(numpy.isfinite(r)):
            return None
        return r


def nls_baseline(dataset, model_template, gen, theta_init, opts=None, theta_true=None):
    """Levenberg-Marquardt fit of theta to the steady-state samples.

    Forward-difference Jacobian with step 1e-6 (1 + |theta_i|), diagonal
    (Marquardt) damping scaled by 10 on rejection and 1/10 on acceptance.
    Candidates where the model cannot be solved cost `opts.penalty`.
    """
    opts = opts or NlsOptions()
    pred = SteadyPredictor(dataset, model_template, gen)
    theta = numpy.array(theta_init, dtype=float)
    penalty_hits = [0]

    def cost_of(r):
        if r is None:
            penalty_hits[0] += 1
            return opts.penalty
        return float(r @ r)

    def track():
        if theta_true is not None:
            trajectory.append(relative_error(theta, theta_true, "nls"))

    trajectory = []
    r = pred.residual(theta)
    cost = cost_of(r)
    track()
    if r is None:
        errorlog.add_entry("nls", "init", "model not solvable at the initial theta", ErrorLog.WARN)
        return NlsResult(theta, 0, cost, trajectory, False, pred.evaluations, penalty_hits[0])
    lam = opts.lambda0
    converged = False
    iterations = 0
    while iterations < opts.max_iterations and not converged:
        iterations += 1
        J = numpy.empty((r.size, theta.size))
        for i in range(theta.size):
            h = 1e-6 * (1.0 + abs(theta[i]))
            bumped = theta.copy()
            bumped[i] += h
            rb = pred.residual(bumped)
            if rb is None:
                bumped[i] = theta[i] - h
                rb = pred.residual(bumped)
                if rb is None:
                    penalty_hits[0] += 1
                    J[:, i] = 0.0
                    continue
                J[:, i] = (r - rb) / h
            else:
                J[:, i] = (rb - r) / h
        A = J.T @ J
        g = J.T @ r
        diag = numpy.maximum(numpy.diag(A), numpy.finfo(float).tiny)
        accepted = False
        while lam <= opts.lambda_max:
            try:
                step = scipy.linalg.solve(A + lam * numpy.diag(diag), -g, assume_a="sym")
            except scipy.linalg.LinAlgError:
                lam *= 10.0
                continue
            if numpy.linalg.norm(step) <= opts.xtol * (numpy.linalg.norm(theta) + opts.xtol):
                converged = True
                break
            candidate = theta + step
            r_new = pred.residual(candidate)
            cost_new = cost_of(r_new)
            if cost_new < cost:
                if cost - cost_new <= opts.ftol * cost:
                    converged = True
                theta, r, cost = candidate, r_new, cost_new
                lam = max(lam / 10.0, 1e-16)
                accepted = True
                break
            lam *= 10.0
        track()
        if not accepted and not converged:
            break
    if penalty_hits[0]:
        errorlog.add_entry("nls", "penalty", "{} candidates were not solvable".format(penalty_hits[0]), ErrorLog.NOTE)
    return NlsResult(theta, iterations, cost, trajectory, converged, pred.evaluations, penalty_hits[0])


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

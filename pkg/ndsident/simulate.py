from __future__ import print_function

import bisect
from collections import namedtuple

import numpy
import scipy.linalg

from .errorlog import errorlog, ErrorLog
from .errors import (
    AssumptionViolation, ConfigError, EigenvalueCollision, NumericalError,
)
from .generator import analyze_generator, coefficients
from .model import DEFAULT_SETTLE_FRACTION, check_regularity, eliminated_realization, pencil_eigenvalues
from .utils import frozen, svd_rank, unvec, vec


COLLISION_TOL = 1e-8
DUAL_PATH_TOL = 1e-9

SampleRecord = namedtuple("SampleRecord", ["subsystem", "t", "y"])

# stream ids for numpy.random.SeedSequence spawn keys
SCHEDULE_STREAM = 0
NOISE_STREAM = 1


def rng_for(seed, stream, index):
    """Independent counter-based stream for (seed, stream, index)."""
    ss = numpy.random.SeedSequence(seed, spawn_key=(stream, index))
    return numpy.random.Generator(numpy.random.Philox(ss))


class SylvesterSolution(object):
    def __init__(self, X, Z, Yss, m_x, residual):
        self.X = frozen(X)
        self.Z = frozen(Z)
        self.Yss = frozen(Yss)
        self.m_x = m_x
        self.residual = residual

    @property
    def X_top(self):
        return self.X[:self.m_x]

    @property
    def X_btm(self):
        return self.X[self.m_x:]


def _nearest_collision(nds, gen):
    pencil, _ = pencil_eigenvalues(nds)
    gen_eigs = numpy.linalg.eigvals(gen.Xi) if gen.m_xi else numpy.zeros(0)
    best = None
    for g in gen_eigs:
        for p in pencil:
            dist = abs(g - p)
            if best is None or dist < best[0]:
                best = (dist, complex(g), complex(p))
    return best


def solve_sylvester(nds, gen):
    """Solves A_theta X + B_stack Pi = E_bar X Xi for X, with Z = E_bar X.
    """
    n = nds.A_theta.shape[0]
    m_xi = gen.m_xi
    rhs_mat = nds.B_stack @ gen.Pi
    best = _nearest_collision(nds, gen)
    if best is not None:
        scale = max(numpy.linalg.norm(nds.A_theta, 2), numpy.linalg.norm(gen.Xi, 2), 1.0)
        if best[0] <= COLLISION_TOL * scale:
            raise EigenvalueCollision(best[1], best[2])
    if n and m_xi:
        K = numpy.kron(numpy.eye(m_xi), nds.A_theta) - numpy.kron(gen.Xi.T, nds.E_bar)
        rank, _, _ = svd_rank(K)
        if rank < K.shape[0]:
            g, p = (best[1], best[2]) if best else (None, None)
            raise EigenvalueCollision(g, p, "Sylvester operator is singular")
        X = unvec(scipy.linalg.solve(K, -vec(rhs_mat)), n, m_xi)
    else:
        X = numpy.zeros((n, m_xi))
    Z = nds.E_bar @ X
    residual = float(numpy.linalg.norm(nds.A_theta @ X + rhs_mat - Z @ gen.Xi))
    Yss = nds.C_theta @ X + nds.D_yu @ gen.Pi
    return SylvesterSolution(X, Z, Yss, nds.m_x, residual)


def interpolation_columns(Yss, spectrum):
    """Yss (W T): the tangential interpolations as (eta_r, eta_c) column blocks."""
    cols = Yss @ spectrum.transform
    m_r = spectrum.m_r
    return cols[:, :m_r].real, cols[:, m_r::2]


def modal_steady_state_response(spectrum, coeffs, eta_r, eta_c, t):
    """Steady-state output as a sum over generator modes.

        y_s(t) = sum alpha_i e^(lambda_i t) eta_r,i + sum Re{conj(beta_i) e^(lambda_i t) eta_c,i}

    with beta_i = mu_i + j nu_i.
    """
    t = float(t)
    m_y = eta_r.shape[0] if eta_r.size else eta_c.shape[0]
    y = numpy.zeros(m_y)
    for i, lam in enumerate(spectrum.lambda_r):
        y += coeffs.alpha[i] * numpy.exp(lam * t) * eta_r[:, i]
    for i, lam in enumerate(spectrum.lambda_c):
        beta = complex(coeffs.mu[i], coeffs.nu[i])
        y += (numpy.conj(beta) * numpy.exp(lam * t) * eta_c[:, i]).real
    return y


def steady_state_response(sol, gen, t, check=True, spectrum=None):
    """Yss expm(Xi t) xi0, cross-checked against the modal sum when `check` is set.
    """
    xi_t = scipy.linalg.expm(gen.Xi * float(t)) @ gen.xi0
    y = sol.Yss @ xi_t
    if check and gen.m_xi:
        if spectrum is None:
            spectrum = analyze_generator(gen)
        coeffs = coefficients(gen, spectrum)
        eta_r, eta_c = interpolation_columns(sol.Yss, spectrum)
        y_modal = modal_steady_state_response(spectrum, coeffs, eta_r, eta_c, t)
        scale = numpy.linalg.norm(sol.Yss) * numpy.linalg.norm(xi_t) + numpy.finfo(float).tiny
        if numpy.linalg.norm(y - y_modal) > DUAL_PATH_TOL * max(scale, 1.0):
            raise NumericalError("t={}".format(t), "steady-state paths disagree by {:.3g}".format(numpy.linalg.norm(y - y_modal)))
    return y


class FullSimulator(object):
    """Exact time response of the z-eliminated network driven by the generator.

    [x; xi](t) = expm([[A_e, B_e Pi], [0, Xi]] t) [x0; xi0], evaluated
    independently at each requested time.
    """

    def __init__(self, nds, gen):
        A_e, B_e, C_e, D_e = eliminated_realization(nds)
        m_x, m_xi = nds.m_x, gen.m_xi
        aug = numpy.zeros((m_x + m_xi, m_x + m_xi))
        aug[:m_x, :m_x] = A_e
        aug[:m_x, m_x:] = B_e @ gen.Pi
        aug[m_x:, m_x:] = gen.Xi
        self.augmented = aug
        self.output = numpy.hstack([C_e, D_e @ gen.Pi])
        self.m_x = m_x
        self.xi0 = gen.xi0

    def state(self, x0, t):
        x0 = numpy.zeros(self.m_x) if x0 is None else numpy.asarray(x0, dtype=float).reshape(-1)
        init = numpy.concatenate([x0, self.xi0])
        return scipy.linalg.expm(self.augmented * float(t)) @ init

    def response(self, x0, t):
        return self.output @ self.state(x0, t)


def full_state_response(nds, gen, x0, t):
    return FullSimulator(nds, gen).state(x0, t)


def full_response(nds, gen, x0, t):
    return FullSimulator(nds, gen).response(x0, t)


def transient_bound(nds, gen, x0, t, sol=None):
    """Norm of the transient part y(t) - y_s(t) at time t."""
    if sol is None:
        sol = solve_sylvester(nds, gen)
    y = full_response(nds, gen, x0, t)
    return float(numpy.linalg.norm(y - steady_state_response(sol, gen, t, check=False)))


class SamplingWindow(object):
    """Sampling plan of one subsystem: t_{j+1} = t_j + U[interval_min, interval_max].

    The timeline starts at t_start and stops at t_end, or once max_samples
    samples at or after count_from have been drawn.
    """

    def __init__(self, subsystem, t_start=0.0, t_end=None, interval_min=0.1, interval_max=5.0,
                 max_samples=None, count_from=None):
        self.subsystem = int(subsystem)
        self.t_start = float(t_start)
        self.t_end = None if t_end is None else float(t_end)
        self.interval_min = float(interval_min)
        self.interval_max = float(interval_max)
        self.max_samples = None if max_samples is None else int(max_samples)
        self.count_from = self.t_start if count_from is None else float(count_from)

    def validate(self):
        where = "schedule subsystem {}".format(self.subsystem)
        if not self.interval_min > 0:
            raise ConfigError(where, "interval_min must be positive")
        if self.interval_max < self.interval_min:
            raise ConfigError(where, "interval_max must be at least interval_min")
        if self.t_start < 0:
            raise ConfigError(where, "t_start must be nonnegative")
        if self.t_end is None and self.max_samples is None:
            raise ConfigError(where, "either t_end or max_samples is required")
        if self.t_end is not None and self.t_end < self.t_start:
            raise ConfigError(where, "empty window [{}, {}]".format(self.t_start, self.t_end))
        if self.max_samples is not None and self.max_samples < 1:
            raise ConfigError(where, "empty window: max_samples < 1")

    def times(self, rng):
        self.validate()
        out = []
        counted = 0
        t = self.t_start
        while True:
            if self.t_end is not None and t > self.t_end:
                break
            out.append(t)
            if t >= self.count_from:
                counted += 1
                if self.max_samples is not None and counted >= self.max_samples:
                    break
            t = t + rng.uniform(self.interval_min, self.interval_max)
        return out


class ScheduleSpec(object):
    def __init__(self, windows):
        self.windows = list(windows)

    @classmethod
    def uniform(cls, subsystems, **kwargs):
        """The same window settings for every listed subsystem."""
        return cls([SamplingWindow(k, **kwargs) for k in subsystems])

    def as_dict(self):
        return [
            {
                "subsystem": w.subsystem, "t_start": w.t_start, "t_end": w.t_end,
                "interval_min": w.interval_min, "interval_max": w.interval_max,
                "max_samples": w.max_samples, "count_from": w.count_from,
            }
            for w in self.windows
        ]


def make_schedule(spec, seed):
    """Merged, time-sorted list of (subsystem, t) over independent per-subsystem timelines."""
    if not spec.windows:
        raise ConfigError("schedule", "no sampling windows")
    events = []
    for w in spec.windows:
        rng = rng_for(seed, SCHEDULE_STREAM, w.subsystem)
        events.extend((w.subsystem, t) for t in w.times(rng))
    events.sort(key=lambda ev: (ev[1], ev[0]))
    return events


class SampleDataset(object):
    """Time-ordered measurements of possibly several subsystems.
    """

    def __init__(self, records, noise_variance=0.0, t_settle=0.0, rng_seed=None, transient_bound=None, meta=None):
        self.records = sorted(records, key=lambda r: r.t)
        self.noise_variance = float(noise_variance)
        self.t_settle = float(t_settle)
        self.rng_seed = rng_seed
        self.transient_bound = transient_bound
        self.meta = dict(meta or {})
        self._times = [r.t for r in self.records]

    def __len__(self):
        return len(self.records)

    @property
    def noise_std(self):
        return float(numpy.sqrt(self.noise_variance))

    @property
    def m0(self):
        """Index of the first record with t >= t_settle."""
        return bisect.bisect_left(self._times, self.t_settle)

    @property
    def steady_records(self):
        return self.records[self.m0:]

    def first_steady(self, count):
        return SampleDataset(
            self.records[:self.m0 + count], self.noise_variance, self.t_settle,
            self.rng_seed, self.transient_bound, self.meta,
        )


def resolve_settling(nds, t_settle=None, settle_fraction=DEFAULT_SETTLE_FRACTION):
    if t_settle is not None:
        return float(t_settle)
    diag = check_regularity(nds, settle_fraction)
    if diag.settling_bound is None:
        raise AssumptionViolation("stability", "model is not asymptotically stable and no t_settle was given")
    return diag.settling_bound


def measure(nds, gen, x0, schedule, noise_std, seed, mode="auto", t_settle=None):
    """Samples S_k y(t) + n at each (k, t) of the schedule.

    mode "full" simulates transients from x0; "steady" evaluates only the
    steady-state response and drops samples before t_settle.  "auto" picks
    "full" whenever E is invertible.
    """
    t_settle = resolve_settling(nds, t_settle)
    if mode == "auto":
        rank, _, _ = svd_rank(nds.E)
        mode = "full" if rank == nds.m_x else "steady"
    if mode not in ("full", "steady"):
        raise ConfigError("simulation", "unknown mode {!r}".format(mode))
    sol = solve_sylvester(nds, gen)
    n_sub = nds.n_subsystems
    for k, _ in schedule:
        if not 0 <= k < n_sub:
            raise ConfigError("schedule", "subsystem {} out of range 0..{}".format(k, n_sub - 1))

    bound = None
    if mode == "full":
        sim = FullSimulator(nds, gen)
        y_of_t = lambda t: sim.response(x0, t)
        bound = float(numpy.linalg.norm(
            sim.response(x0, t_settle) - steady_state_response(sol, gen, t_settle, check=False)
        ))
    else:
        spectrum = analyze_generator(gen)
        y_of_t = lambda t: steady_state_response(sol, gen, t, spectrum=spectrum)
        early = sum(1 for _, t in schedule if t < t_settle)
        if early:
            errorlog.add_entry("measure", "steady", "dropped {} samples before t_settle={}".format(early, t_settle), ErrorLog.NOTE)
        schedule = [(k, t) for k, t in schedule if t >= t_settle]

    noise_rngs = {}
    records = []
    for k, t in schedule:
        start, stop = nds.y_offsets[k]
        if stop == start:
            continue
        y = y_of_t(t)[start:stop]
        if noise_std > 0:
            if k not in noise_rngs:
                noise_rngs[k] = rng_for(seed, NOISE_STREAM, k)
            y = y + noise_std * noise_rngs[k].standard_normal(stop - start)
        records.append(SampleRecord(k, float(t), frozen(y)))
    return SampleDataset(records, noise_std ** 2, t_settle, seed, bound, {"mode": mode})


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

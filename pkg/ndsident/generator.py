from __future__ import print_function

import numpy
import scipy.linalg

from .errors import AssumptionViolation, DimensionError
from .utils import as_matrix, frozen


DISTINCT_TOL = 1e-8
_PAIR_BLOCK = numpy.array([[1.0, 1.0], [1.0j, -1.0j]])


class InputGenerator(object):
    """Autonomous exosystem xi' = Xi xi, u = Pi xi, xi(0) = xi0."""

    def __init__(self, Xi, Pi, xi0):
        self.Xi = frozen(as_matrix(Xi))
        m_xi = self.Xi.shape[0]
        self.Pi = frozen(as_matrix(Pi, 0, m_xi))
        self.xi0 = frozen(numpy.asarray(xi0, dtype=float).reshape(-1))
        if self.Xi.shape != (m_xi, m_xi):
            raise DimensionError("generator", "Xi must be square, got {}".format(self.Xi.shape))
        if self.Pi.shape[1] != m_xi:
            raise DimensionError("generator", "Pi needs {} columns, got {}".format(m_xi, self.Pi.shape[1]))
        if self.xi0.size != m_xi:
            raise DimensionError("generator", "xi0 needs {} entries, got {}".format(m_xi, self.xi0.size))

    @property
    def m_xi(self):
        return self.Xi.shape[0]

    @property
    def m_u(self):
        return self.Pi.shape[0]


class GeneratorSpectrum(object):
    """Canonical eigenstructure of Xi.

    Reals come first in ascending order, then one omega > 0 representative per
    conjugate pair ordered by (omega, sigma).  W is a real modal basis with
    Xi W = W J (J real block diagonal) and T the block transform turning each
    [[sigma, omega], [-omega, sigma]] block into diag(lambda, conj(lambda)).
    """

    def __init__(self, lambda_r, lambda_c, W, Pi, ordering):
        self.lambda_r = frozen(numpy.asarray(lambda_r, dtype=float))
        self.lambda_c = frozen(numpy.asarray(lambda_c, dtype=complex))
        self.W = frozen(W)
        self.ordering = tuple(ordering)
        m_r, m_c = self.m_r, self.m_c
        T = numpy.eye(m_r + 2 * m_c, dtype=complex)
        for i in range(m_c):
            j = m_r + 2 * i
            T[j:j + 2, j:j + 2] = _PAIR_BLOCK
        self.T = frozen(T)
        pis = numpy.asarray(Pi) @ self.transform
        self.pi_r = frozen(pis[:, :m_r].real)
        self.pi_c = frozen(pis[:, m_r::2])

    @property
    def m_r(self):
        return self.lambda_r.size

    @property
    def m_c(self):
        return self.lambda_c.size

    @property
    def m_xi(self):
        return self.m_r + 2 * self.m_c

    @property
    def d(self):
        """Length of psi(t): one entry per real mode, two per complex pair."""
        return self.m_r + 2 * self.m_c

    @property
    def transform(self):
        return self.W @ self.T

    @property
    def Lambda(self):
        diag = list(self.lambda_r)
        for lam in self.lambda_c:
            diag.extend([lam, numpy.conj(lam)])
        return numpy.diag(numpy.array(diag, dtype=complex))

    @property
    def eigenvalues(self):
        """Every eigenvalue of Xi, conjugates included, in transform column order."""
        return numpy.diag(self.Lambda)

    def reconstruct(self):
        TT = self.transform
        return (TT @ self.Lambda @ numpy.linalg.inv(TT)).real


class SteadyCoefficients(object):
    def __init__(self, alpha, mu, nu):
        self.alpha = frozen(numpy.asarray(alpha, dtype=float))
        self.mu = frozen(numpy.asarray(mu, dtype=float))
        self.nu = frozen(numpy.asarray(nu, dtype=float))
        self.phase = frozen(numpy.arctan2(self.nu, self.mu))
        self.amplitude = frozen(numpy.hypot(self.mu, self.nu))

    def modal(self):
        """Coefficients in the modal basis: [alpha..., mu_1, nu_1, mu_2, nu_2, ...]."""
        pairs = numpy.empty(2 * self.mu.size)
        pairs[0::2] = self.mu
        pairs[1::2] = self.nu
        return numpy.concatenate([self.alpha, pairs])

    def to_xi0(self, spectrum):
        return spectrum.W @ self.modal()


def _normalize(vec):
    mags = numpy.abs(vec)
    k = int(numpy.argmax(mags >= (1.0 - 1e-6) * mags.max()))
    return vec / vec[k]


def analyze_generator(gen, tol=DISTINCT_TOL):
    Xi = gen.Xi
    m_xi = gen.m_xi
    if m_xi == 0:
        return GeneratorSpectrum([], [], numpy.zeros((0, 0)), gen.Pi, [])
    eigs, vecs = scipy.linalg.eig(Xi)
    scale = max(numpy.linalg.norm(Xi), numpy.finfo(float).tiny)
    for i in range(m_xi):
        for j in range(i + 1, m_xi):
            if abs(eigs[i] - eigs[j]) <= tol * scale:
                raise AssumptionViolation(
                    "generator",
                    "eigenvalues must be pairwise distinct, {!r} and {!r} coincide".format(eigs[i], eigs[j])
                )

    imag_tol = tol * max(scale, 1.0)
    reals = [i for i in range(m_xi) if abs(eigs[i].imag) <= imag_tol]
    uppers = [i for i in range(m_xi) if eigs[i].imag > imag_tol]
    reals.sort(key=lambda i: eigs[i].real)
    uppers.sort(key=lambda i: (eigs[i].imag, eigs[i].real))
    if len(reals) + 2 * len(uppers) != m_xi:
        raise AssumptionViolation("generator", "Xi must be real with conjugate-paired eigenvalues")

    cols = []
    for i in reals:
        cols.append(_normalize(vecs[:, i].real))
    for i in uppers:
        v = _normalize(vecs[:, i])
        cols.append(v.real)
        cols.append(v.imag)
    W = numpy.column_stack(cols)
    lambda_r = [eigs[i].real for i in reals]
    lambda_c = [eigs[i] for i in uppers]
    return GeneratorSpectrum(lambda_r, lambda_c, W, gen.Pi, reals + uppers)


def coefficients(gen, spectrum):
    w0 = scipy.linalg.solve(spectrum.W, gen.xi0) if gen.m_xi else numpy.zeros(0)
    m_r = spectrum.m_r
    return SteadyCoefficients(w0[:m_r], w0[m_r::2], w0[m_r + 1::2])


def psi(spectrum, coeffs, t):
    """Regressor psi(t) weighting [eta_r; Re eta_c; Im eta_c] in the steady-state output.

    Complex pairs contribute amp*cos(omega t - phase)e^(sigma t) and
    -amp*sin(omega t - phase)e^(sigma t).
    """
    t = float(t)
    out = numpy.empty(spectrum.d)
    m_r = spectrum.m_r
    out[:m_r] = coeffs.alpha * numpy.exp(spectrum.lambda_r * t)
    sigma = spectrum.lambda_c.real
    omega = spectrum.lambda_c.imag
    envelope = coeffs.amplitude * numpy.exp(sigma * t)
    arg = omega * t - coeffs.phase
    out[m_r::2] = envelope * numpy.cos(arg)
    out[m_r + 1::2] = -envelope * numpy.sin(arg)
    return out


def psi_matrix(spectrum, coeffs, times):
    """Rows psi(t_j) for each sample time."""
    times = numpy.asarray(times, dtype=float).reshape(-1)
    out = numpy.empty((times.size, spectrum.d))
    for j, t in enumerate(times):
        out[j] = psi(spectrum, coeffs, t)
    return out


def generator_state(gen, t):
    return scipy.linalg.expm(gen.Xi * float(t)) @ gen.xi0


def input_u(gen, t):
    return gen.Pi @ generator_state(gen, t)


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

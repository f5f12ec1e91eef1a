import math

import numpy
import pytest
from ndsident.errors import AssumptionViolation, DimensionError
from ndsident.generator import (
    InputGenerator, SteadyCoefficients, analyze_generator, coefficients, generator_state,
    input_u, psi, psi_matrix,
)

from .conftest import make_benchmark_generator, make_random_generator


def make_mixed_generator():
    """Eigenvalues -0.5, 0 and +-0.7j, hidden behind a similarity transform."""
    J = numpy.zeros((4, 4))
    J[0, 0] = -0.5
    J[2, 3] = 0.7
    J[3, 2] = -0.7
    rng = numpy.random.default_rng(4)
    S = numpy.eye(4) + 0.3 * rng.standard_normal((4, 4))
    Xi = S @ J @ numpy.linalg.inv(S)
    return InputGenerator(Xi, rng.standard_normal((2, 4)), rng.uniform(0.5, 1.5, size=4))


# --- Construction ---

def test_generator_dimension_checks():
    with pytest.raises(DimensionError):
        InputGenerator([[0.0, 1.0]], [[1.0, 1.0]], [1.0, 1.0])
    with pytest.raises(DimensionError):
        InputGenerator(numpy.zeros((2, 2)), [[1.0, 1.0, 1.0]], [1.0, 1.0])
    with pytest.raises(DimensionError):
        InputGenerator(numpy.zeros((2, 2)), [[1.0, 1.0]], [1.0])


def test_repeated_eigenvalues_rejected():
    gen = InputGenerator(numpy.zeros((2, 2)), [[1.0, 1.0]], [1.0, 1.0])
    with pytest.raises(AssumptionViolation):
        analyze_generator(gen)


def test_jordan_block_rejected():
    gen = InputGenerator([[0.0, 1.0], [0.0, 0.0]], [[1.0, 0.0]], [1.0, 1.0])
    with pytest.raises(AssumptionViolation):
        analyze_generator(gen)


# --- Spectrum ---

def test_benchmark_generator_spectrum():
    spec = analyze_generator(make_benchmark_generator())
    assert spec.m_r == 0
    assert spec.m_c == 1
    assert spec.d == 2
    assert spec.lambda_c[0] == pytest.approx(0.32j, abs=1e-14)
    assert numpy.allclose(spec.pi_c[:, 0], [1.5 + 2.0j, 2.0 + 1.0j], atol=1e-12)


def test_transform_diagonalizes():
    gen = make_mixed_generator()
    spec = analyze_generator(gen)
    TT = spec.transform
    assert numpy.allclose(gen.Xi @ TT, TT @ spec.Lambda, atol=1e-10)
    assert numpy.allclose(spec.reconstruct(), gen.Xi, atol=1e-10)


def test_canonical_ordering():
    spec = analyze_generator(make_mixed_generator())
    assert spec.m_r == 2
    assert spec.m_c == 1
    assert spec.lambda_r[0] == pytest.approx(-0.5)
    assert spec.lambda_r[1] == pytest.approx(0.0, abs=1e-10)
    assert spec.lambda_c[0].imag == pytest.approx(0.7)
    assert numpy.all(numpy.isreal(spec.W))


def test_pairs_sorted_by_frequency():
    Xi = numpy.zeros((4, 4))
    Xi[0, 1], Xi[1, 0] = 2.0, -2.0
    Xi[2, 3], Xi[3, 2] = 0.5, -0.5
    spec = analyze_generator(InputGenerator(Xi, numpy.ones((1, 4)), numpy.ones(4)))
    assert [lam.imag for lam in spec.lambda_c] == pytest.approx([0.5, 2.0])


# --- Coefficients and psi ---

def test_benchmark_generator_coefficients():
    gen = make_benchmark_generator()
    spec = analyze_generator(gen)
    coeffs = coefficients(gen, spec)
    assert coeffs.mu[0] == pytest.approx(1.0)
    assert coeffs.nu[0] == pytest.approx(1.0)
    assert coeffs.phase[0] == pytest.approx(math.pi / 4)
    assert coeffs.amplitude[0] == pytest.approx(math.sqrt(2.0))


def test_psi_at_zero():
    gen = make_benchmark_generator()
    spec = analyze_generator(gen)
    assert numpy.allclose(psi(spec, coefficients(gen, spec), 0.0), [1.0, 1.0], atol=1e-12)


def test_psi_is_periodic():
    gen = make_benchmark_generator()
    spec = analyze_generator(gen)
    coeffs = coefficients(gen, spec)
    period = 2 * math.pi / 0.32
    assert numpy.allclose(psi(spec, coeffs, 3.0), psi(spec, coeffs, 3.0 + period), atol=1e-12)


def test_coefficients_round_trip_xi0():
    gen = make_mixed_generator()
    spec = analyze_generator(gen)
    coeffs = coefficients(gen, spec)
    assert numpy.allclose(coeffs.to_xi0(spec), gen.xi0, atol=1e-12)


def test_psi_reproduces_generator_state():
    # xi(t) = W [psi_r; (psi_c pairs)] with the real modal basis
    gen = make_mixed_generator()
    spec = analyze_generator(gen)
    coeffs = coefficients(gen, spec)
    for t in (0.0, 1.3, 4.0):
        p = psi(spec, coeffs, t)
        assert numpy.allclose(spec.W @ p, generator_state(gen, t), atol=1e-9)


def test_psi_matrix_rows():
    gen = make_random_generator(2)
    spec = analyze_generator(gen)
    coeffs = coefficients(gen, spec)
    rows = psi_matrix(spec, coeffs, [0.0, 2.0])
    assert rows.shape == (2, spec.d)
    assert numpy.allclose(rows[1], psi(spec, coeffs, 2.0))


def test_steady_coefficients_modal_order():
    c = SteadyCoefficients([2.0], [3.0, 5.0], [4.0, 6.0])
    assert list(c.modal()) == [2.0, 3.0, 4.0, 5.0, 6.0]


# --- Inputs ---

def test_input_at_zero():
    assert numpy.allclose(input_u(make_benchmark_generator(), 0.0), [3.5, 3.0])


def test_generator_state_rotates():
    gen = make_benchmark_generator()
    t = 1.7
    c, s = math.cos(0.32 * t), math.sin(0.32 * t)
    assert numpy.allclose(generator_state(gen, t), [c + s, -s + c], atol=1e-12)

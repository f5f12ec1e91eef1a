import numpy
import pytest
from ndsident.utils import (
    as_matrix, format_float, format_time, frozen, lstsq_pivoted,
    relative_difference, svd_rank, unvec, vec,
)


# --- vec / unvec ---

def test_vec_is_column_major():
    A = numpy.array([[1.0, 2.0], [3.0, 4.0]])
    assert list(vec(A)) == [1.0, 3.0, 2.0, 4.0]


def test_unvec_inverts_vec():
    A = numpy.arange(6.0).reshape(2, 3)
    assert numpy.array_equal(unvec(vec(A), 2, 3), A)


def test_vec_kron_identity():
    rng = numpy.random.default_rng(0)
    A = rng.standard_normal((3, 2))
    B = rng.standard_normal((2, 4))
    C = rng.standard_normal((4, 2))
    lhs = vec(A @ B @ C)
    rhs = numpy.kron(C.T, A) @ vec(B)
    assert numpy.allclose(lhs, rhs, atol=1e-12)


# --- as_matrix / frozen ---

def test_as_matrix_empty_keeps_shape():
    assert as_matrix([], 3, 0).shape == (3, 0)
    assert as_matrix(None, 0, 2).shape == (0, 2)


def test_as_matrix_promotes_scalars_and_rows():
    assert as_matrix(2.0).shape == (1, 1)
    assert as_matrix([1.0, 2.0]).shape == (1, 2)


def test_frozen_is_read_only():
    arr = frozen([1.0, 2.0])
    with pytest.raises(ValueError):
        arr[0] = 5.0


# --- formatting ---

def test_format_float_round_trips():
    for x in (0.1, 1.0 / 3.0, 1e-300, -2.5e17):
        assert float(format_float(x)) == x


def test_format_time_round_trips():
    t = 14.250000000000002
    assert float(format_time(t)) == t


# --- rank and least squares ---

def test_svd_rank_full():
    rank, cond, s = svd_rank(numpy.diag([2.0, 1.0]))
    assert rank == 2
    assert cond == pytest.approx(2.0)
    assert len(s) == 2


def test_svd_rank_deficient_has_infinite_cond():
    rank, cond, _ = svd_rank(numpy.array([[1.0, 2.0], [2.0, 4.0]]))
    assert rank == 1
    assert cond == numpy.inf


def test_svd_rank_zero_matrix():
    rank, cond, _ = svd_rank(numpy.zeros((2, 2)))
    assert rank == 0


def test_lstsq_pivoted_exact_solution():
    A = numpy.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    x = numpy.array([3.0, -1.0])
    sol = lstsq_pivoted(A, A @ x)
    assert sol.rank_ok
    assert numpy.allclose(sol.x, x, atol=1e-12)
    assert sol.residual < 1e-12


def test_lstsq_pivoted_flags_rank_deficiency():
    A = numpy.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    sol = lstsq_pivoted(A, numpy.array([1.0, 2.0, 3.0]), 1e-10)
    assert sol.rank == 1
    assert sol.rank_ok is False
    assert sol.residual < 1e-12


def test_lstsq_pivoted_no_columns():
    sol = lstsq_pivoted(numpy.zeros((3, 0)), numpy.ones(3))
    assert sol.x.size == 0
    assert sol.rank_ok


def test_relative_difference():
    assert relative_difference([1.0, 1.0], [1.0, 1.0]) == 0.0
    assert relative_difference([2.0], [1.0]) == pytest.approx(1.0)

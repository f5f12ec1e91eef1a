from __future__ import print_function

from collections import namedtuple

import numpy
import scipy.linalg


LstsqResult = namedtuple("LstsqResult", ["x", "rank", "rank_ok", "cond", "residual"])


def vec(A):
    """Column-major vectorization, so that vec(ABC) = (C^T kron A) vec(B)."""
    return numpy.asarray(A).reshape(-1, order="F")


def unvec(v, rows, cols):
    return numpy.asarray(v).reshape((rows, cols), order="F")


def as_matrix(data, rows=None, cols=None, dtype=float):
    """Coerces nested lists into a 2-D array, allowing empty matrices of a known shape.
    """
    if data is None:
        return numpy.zeros((rows or 0, cols or 0), dtype=dtype)
    arr = numpy.array(data, dtype=dtype)
    if arr.size == 0:
        return numpy.zeros((rows or 0, cols or 0), dtype=dtype)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


def frozen(arr):
    arr = numpy.array(arr)
    arr.setflags(write=False)
    return arr


def format_float(x):
    # repr() is the shortest string that round-trips a float64.
    return repr(float(x))


def format_time(t):
    return "{:.17g}".format(float(t))


def svd_rank(A, rtol=None):
    """Returns (rank, cond, singular values) with a tolerance relative to sigma_max.

    The default tolerance is max(rows, cols) * eps.
    """
    A = numpy.atleast_2d(A)
    if A.size == 0:
        return 0, 1.0, numpy.zeros(0)
    s = scipy.linalg.svdvals(A)
    if rtol is None:
        rtol = max(A.shape) * numpy.finfo(float).eps
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return 0, numpy.inf, s
    rank = int(numpy.sum(s > rtol * smax))
    ncols = A.shape[1]
    if rank < ncols or s.size < ncols:
        cond = numpy.inf
    else:
        cond = float(smax / s[-1])
    return rank, cond, s


def lstsq_pivoted(A, b, rtol=None):
    """Least-squares solve through a column-pivoted QR factorization.

    Rank and condition number come from the singular values of A; a
    rank-deficient system returns the basic solution with rank_ok False.
    """
    A = numpy.atleast_2d(numpy.asarray(A, dtype=float))
    b = numpy.asarray(b, dtype=float).reshape(-1)
    ncols = A.shape[1]
    if ncols == 0:
        return LstsqResult(numpy.zeros(0), 0, True, 1.0, float(numpy.linalg.norm(b)))
    rank, cond, _ = svd_rank(A, rtol)
    x = numpy.zeros(ncols)
    if rank > 0:
        Q, R, perm = scipy.linalg.qr(A, mode="economic", pivoting=True)
        qtb = Q.T @ b
        z = scipy.linalg.solve_triangular(R[:rank, :rank], qtb[:rank])
        x[perm[:rank]] = z
    residual = float(numpy.linalg.norm(A @ x - b))
    return LstsqResult(x, rank, rank == ncols, cond, residual)


def relative_difference(a, b):
    a = numpy.asarray(a)
    b = numpy.asarray(b)
    scale = max(numpy.linalg.norm(b), numpy.finfo(float).tiny)
    return float(numpy.linalg.norm(a - b) / scale)


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap

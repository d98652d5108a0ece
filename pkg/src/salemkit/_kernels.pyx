# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: exponential sums over lattice atoms and exact ball sums."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI

cnp.import_array()


def exp_sum(const cnp.int64_t[:, ::1] pts, const double[::1] w, double inv_scale,
            const double[:, ::1] xi):
    """sum_a w_a exp(-2 pi i (a * inv_scale) . xi_j) for every row xi_j."""
    cdef Py_ssize_t K = pts.shape[0], d = pts.shape[1], J = xi.shape[0]
    cdef Py_ssize_t j, k, l
    cdef double ph, re, im, two_pi = 2.0 * M_PI
    out = np.empty(J, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for j in range(J):
            re = 0.0
            im = 0.0
            for k in range(K):
                ph = 0.0
                for l in range(d):
                    ph = ph + <double>pts[k, l] * xi[j, l]
                ph = -two_pi * ph * inv_scale
                re = re + w[k] * cos(ph)
                im = im + w[k] * sin(ph)
            o[j] = re + 1j * im
    return out


def ball_sums(const cnp.int64_t[:, ::1] pts, const cnp.int64_t[::1] w,
              const cnp.int64_t[:, ::1] centers, cnp.int64_t lhs_mul, cnp.int64_t rhs):
    """sum of w_a over atoms with lhs_mul * |a - c|^2 < rhs, per center c.

    The caller guarantees that no intermediate exceeds the int64 range.
    """
    cdef Py_ssize_t K = pts.shape[0], d = pts.shape[1], J = centers.shape[0]
    cdef Py_ssize_t j, k, l
    cdef cnp.int64_t s, diff, acc
    out = np.zeros(J, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    with nogil:
        for j in range(J):
            acc = 0
            for k in range(K):
                s = 0
                for l in range(d):
                    diff = pts[k, l] - centers[j, l]
                    s = s + diff * diff
                if lhs_mul * s < rhs:
                    acc = acc + w[k]
            o[j] = acc
    return out


cdef inline cnp.int64_t _isqrt(cnp.int64_t v) nogil:
    # largest x with x*x <= v, v >= 0
    cdef cnp.int64_t x = <cnp.int64_t>sqrt(<double>v)
    while x * x > v:
        x -= 1
    while (x + 1) * (x + 1) <= v:
        x += 1
    return x


def grid_disc_counts(const cnp.int64_t[:, ::1] cum, const cnp.int64_t[:, ::1] centers,
                     cnp.int64_t R2):
    """Occupied cells strictly inside the disc of squared radius R2 about each center.

    cum[i, j] holds the number of occupied cells in row i with column < j.
    Centers are (row, column) grid coordinates.
    """
    cdef Py_ssize_t G0 = cum.shape[0], G1 = cum.shape[1] - 1, J = centers.shape[0]
    cdef Py_ssize_t j
    cdef cnp.int64_t cy, cx, dy, row, half, lo, hi, acc, R
    out = np.zeros(J, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    R = _isqrt(R2)
    with nogil:
        for j in range(J):
            cy = centers[j, 0]
            cx = centers[j, 1]
            acc = 0
            for dy in range(-R, R + 1):
                if dy * dy >= R2:
                    continue
                row = cy + dy
                if row < 0 or row >= G0:
                    continue
                half = _isqrt(R2 - dy * dy - 1)
                lo = cx - half
                hi = cx + half + 1
                if lo < 0:
                    lo = 0
                if hi > G1:
                    hi = G1
                if hi > lo:
                    acc = acc + cum[row, hi] - cum[row, lo]
            o[j] = acc
    return out

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_kernels_py``.

Each output element (or each row of a pair sum) is computed by exactly one
thread in a fixed order, so results do not depend on the thread count.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp, log, lgamma, sqrt, floor, fabs

cnp.import_array()

NAME = "compiled"

cdef double SERIES_MAX = 2.0
cdef double RESCALE = 1e250


cdef inline int _miller_start(int n, double x) noexcept nogil:
    cdef double top = x if x > n else <double>n
    cdef int start = <int>top + 30 + <int>sqrt(80.0 * top)
    return start + (start & 1)


cdef double _jn(int n, double x) noexcept nogil:
    cdef double half, q, term, total, two_over_x, bj, bjp, bjm, ans
    cdef int k, top
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x <= SERIES_MAX:
        half = 0.5 * x
        q = -half * half
        term = exp(n * log(half) - lgamma(n + 1.0))
        total = term
        for k in range(1, 40):
            term = term * q / (k * (k + n))
            total = total + term
        return total
    top = _miller_start(n, x)
    two_over_x = 2.0 / x
    bjp = 0.0
    bj = 1.0
    ans = 0.0
    total = 0.0
    for k in range(top, 0, -1):
        bjm = k * two_over_x * bj - bjp
        bjp = bj
        bj = bjm
        if fabs(bj) > RESCALE:
            bj = bj / RESCALE
            bjp = bjp / RESCALE
            ans = ans / RESCALE
            total = total / RESCALE
        if k - 1 == n:
            ans = bj
        if k - 1 > 0 and (k - 1) % 2 == 0:
            total = total + 2.0 * bj
    total = total + bj
    return ans / total


def bessel_jn(int n, x, int threads=1):
    """``J_n(x)`` for integer ``n >= 0`` and a 1-D array of ``x >= 0``."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t size = xv.shape[0], i
    out = np.empty(size, dtype=np.float64)
    cdef double[::1] ov = out
    if threads < 1:
        threads = 1
    for i in prange(size, nogil=True, num_threads=threads, schedule="static"):
        ov[i] = _jn(n, xv[i])
    return out


def bilinear(raster, double x_left, double y_top, double pitch, xs, ys, int threads=1):
    """Cell-centred bilinear sampling, zero outside the raster extent."""
    cdef const double[:, ::1] r = np.ascontiguousarray(raster, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t size = xv.shape[0], k
    cdef Py_ssize_t ny = r.shape[0], nx = r.shape[1]
    cdef Py_ssize_t i0, i1, j0, j1
    cdef double u, v, fu, fv, top, bottom, xx, yy
    out = np.empty(size, dtype=np.float64)
    cdef double[::1] ov = out
    if threads < 1:
        threads = 1
    for k in prange(size, nogil=True, num_threads=threads, schedule="static"):
        xx = xv[k]
        yy = yv[k]
        if xx < x_left or xx > x_left + nx * pitch or yy > y_top or yy < y_top - ny * pitch:
            ov[k] = 0.0
            continue
        u = (xx - x_left) / pitch - 0.5
        v = (y_top - yy) / pitch - 0.5
        if u < 0.0:
            u = 0.0
        if u > nx - 1.0:
            u = nx - 1.0
        if v < 0.0:
            v = 0.0
        if v > ny - 1.0:
            v = ny - 1.0
        j0 = <Py_ssize_t>floor(u)
        i0 = <Py_ssize_t>floor(v)
        if nx >= 2 and j0 > nx - 2:
            j0 = nx - 2
        if nx < 2:
            j0 = 0
        if ny >= 2 and i0 > ny - 2:
            i0 = ny - 2
        if ny < 2:
            i0 = 0
        j1 = j0 + 1 if j0 + 1 < nx else nx - 1
        i1 = i0 + 1 if i0 + 1 < ny else ny - 1
        fu = u - j0
        fv = v - i0
        top = (1.0 - fu) * r[i0, j0] + fu * r[i0, j1]
        bottom = (1.0 - fu) * r[i1, j0] + fu * r[i1, j1]
        ov[k] = (1.0 - fv) * top + fv * bottom
    return out


def pixel_sum(sub, int threads=1):
    """Sum the trailing (subsample) axis of a ``(ny, nx, s*s)`` array."""
    cdef const double[:, :, ::1] s = np.ascontiguousarray(sub, dtype=np.float64)
    cdef Py_ssize_t ny = s.shape[0], nx = s.shape[1], ns = s.shape[2]
    cdef Py_ssize_t p, i, j, k
    cdef double acc
    out = np.empty((ny, nx), dtype=np.float64)
    cdef double[:, ::1] ov = out
    if threads < 1:
        threads = 1
    for p in prange(ny * nx, nogil=True, num_threads=threads, schedule="static"):
        i = p // nx
        j = p % nx
        acc = 0.0
        for k in range(ns):
            acc = acc + s[i, j, k]
        ov[i, j] = acc
    return out


cdef inline double _abs2(double re, double im) noexcept nogil:
    return re * re + im * im


def pair_sums(w, a, abar, b, bbar, int threads=1):
    """Brute-force double sums over node pairs; see ``_kernels_py.pair_sums``."""
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double complex[::1] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef const double complex[::1] abv = np.ascontiguousarray(abar, dtype=np.complex128)
    cdef const double complex[::1] bv = np.ascontiguousarray(b, dtype=np.complex128)
    cdef const double complex[::1] bbv = np.ascontiguousarray(bbar, dtype=np.complex128)
    cdef Py_ssize_t n = wv.shape[0], i, j
    rows = np.zeros((3, n), dtype=np.float64)
    cdef double[:, ::1] rv = rows
    cdef double scd, scc, sdd, wij
    cdef double complex zcd, zcc, zdd
    if threads < 1:
        threads = 1
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        scd = 0.0
        scc = 0.0
        sdd = 0.0
        for j in range(n):
            wij = wv[i] * wv[j]
            zcd = av[i] * bv[j] - abv[j] * bbv[i]
            zcc = abv[i] * bv[j] + abv[j] * bv[i]
            zdd = av[i] * bbv[j] + av[j] * bbv[i]
            scd = scd + wij * _abs2(zcd.real, zcd.imag)
            scc = scc + wij * _abs2(zcc.real, zcc.imag)
            sdd = sdd + wij * _abs2(zdd.real, zdd.imag)
        rv[0, i] = scd
        rv[1, i] = scc
        rv[2, i] = sdd
    return float(np.sum(rows[0])), float(np.sum(rows[1])), float(np.sum(rows[2]))

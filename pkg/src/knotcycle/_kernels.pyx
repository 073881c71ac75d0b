# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the triple/pair scans in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()

cdef double SIN_COLLINEAR = 1e-14


cdef inline double _radius(double x0, double x1, double x2,
                           double y0, double y1, double y2,
                           double z0, double z1, double z2) nogil:
    cdef double u0 = x0 - y0, u1 = x1 - y1, u2 = x2 - y2
    cdef double v0 = y0 - z0, v1 = y1 - z1, v2 = y2 - z2
    cdef double w0 = x0 - z0, w1 = x1 - z1, w2 = x2 - z2
    cdef double lu = sqrt(u0 * u0 + u1 * u1 + u2 * u2)
    cdef double lv = sqrt(v0 * v0 + v1 * v1 + v2 * v2)
    cdef double lw = sqrt(w0 * w0 + w1 * w1 + w2 * w2)
    cdef double c0 = u1 * v2 - u2 * v1
    cdef double c1 = u2 * v0 - u0 * v2
    cdef double c2 = u0 * v1 - u1 * v0
    cdef double cr = sqrt(c0 * c0 + c1 * c1 + c2 * c2)
    cdef double sn, d
    if lu > 0 and lv > 0 and lw > 0:
        sn = cr / (lu * lv)
        if sn < SIN_COLLINEAR:
            return INFINITY
        return lw / (2.0 * sn)
    d = lu
    if lv > d:
        d = lv
    if lw > d:
        d = lw
    return 0.5 * d


def min_triple_radius(points):
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j, k, bi = -1, bj = -1, bk = -1
    cdef double r, best = INFINITY
    with nogil:
        for i in range(n - 2):
            for j in range(i + 1, n - 1):
                for k in range(j + 1, n):
                    r = _radius(p[i, 0], p[i, 1], p[i, 2],
                                p[j, 0], p[j, 1], p[j, 2],
                                p[k, 0], p[k, 1], p[k, 2])
                    if r < best:
                        best = r
                        bi = i
                        bj = j
                        bk = k
    return (best, bi, bj, bk)


def min_pair_radius(x, points, mask):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.uint8_t[::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j, bi = -1, bj = -1
    cdef double r, best = INFINITY
    with nogil:
        for i in range(n - 1):
            if not m[i]:
                continue
            for j in range(i + 1, n):
                if not m[j]:
                    continue
                r = _radius(xv[0], xv[1], xv[2],
                            p[i, 0], p[i, 1], p[i, 2],
                            p[j, 0], p[j, 1], p[j, 2])
                if r < best:
                    best = r
                    bi = i
                    bj = j
    return (best, bi, bj)


def pointtangent_radii(points, tangents, Py_ssize_t band):
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] t = np.ascontiguousarray(tangents, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, d
    cdef double c0, c1, c2, x0, x1, x2, cc, cr
    with nogil:
        for i in range(n):
            for j in range(n):
                d = i - j if i > j else j - i
                if n - d < d:
                    d = n - d
                if d < band:
                    o[i, j] = INFINITY
                    continue
                c0 = p[i, 0] - p[j, 0]
                c1 = p[i, 1] - p[j, 1]
                c2 = p[i, 2] - p[j, 2]
                cc = c0 * c0 + c1 * c1 + c2 * c2
                x0 = c1 * t[j, 2] - c2 * t[j, 1]
                x1 = c2 * t[j, 0] - c0 * t[j, 2]
                x2 = c0 * t[j, 1] - c1 * t[j, 0]
                cr = sqrt(x0 * x0 + x1 * x1 + x2 * x2)
                if cr == 0:
                    o[i, j] = INFINITY
                else:
                    o[i, j] = cc / (2.0 * cr)
    return out

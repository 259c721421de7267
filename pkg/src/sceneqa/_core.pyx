# cython: language_level=3
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, sqrt, fabs, floor, ceil, M_PI, NAN

from .relations import COINCIDENT_EPS, DegeneratePairError

cnp.import_array()

cdef int MEAN = 0
cdef int MAX = 1

cdef double RAD2DEG = 180.0 / M_PI


cdef inline int _bin(double theta) noexcept nogil:
    # indices follow Relation declaration order
    if -30.0 < theta <= 30.0:
        return 0
    if 30.0 < theta <= 90.0:
        return 1
    if -90.0 < theta <= -30.0:
        return 2
    if 90.0 < theta <= 150.0:
        return 3
    if -150.0 < theta <= -90.0:
        return 4
    return 5


def relation_matrix(centers, double fx, double fy):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(centers, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[cnp.int8_t, ndim=2] out = np.full((n, n), -1, dtype=np.int8)
    cdef Py_ssize_t i, j
    cdef double dx, dy, theta
    cdef double eps = COINCIDENT_EPS
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dx = pts[j, 0] - pts[i, 0]
            dy = pts[j, 1] - pts[i, 1]
            if sqrt(dx * dx + dy * dy) < eps:
                raise DegeneratePairError(f"degenerate pair: nodes {i} and {j} share a center")
            theta = atan2(fx * dy - fy * dx, fx * dx + fy * dy) * RAD2DEG
            if theta <= -180.0:
                theta = 180.0
            out[i, j] = _bin(theta)
    return out


cdef inline void _window(double center, double extent, Py_ssize_t size,
                         Py_ssize_t* lo, Py_ssize_t* hi) noexcept nogil:
    cdef Py_ssize_t a = <Py_ssize_t>floor(center - extent - 0.5)
    cdef Py_ssize_t b = <Py_ssize_t>ceil(center + extent - 0.5)
    lo[0] = a if a > 0 else 0
    hi[0] = b if b < size - 1 else size - 1


def pool_rotated(data, double cx, double cy, double hx, double hy,
                 double cos_yaw, double sin_yaw, int mode):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] grid = np.ascontiguousarray(data, dtype=np.float64)
    cdef Py_ssize_t h = grid.shape[0], w = grid.shape[1], d = grid.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] acc = np.empty(d, dtype=np.float64)
    cdef double[:, :, ::1] g = grid
    cdef double[::1] a = acc
    cdef double ex = fabs(hx * cos_yaw) + fabs(hy * sin_yaw)
    cdef double ey = fabs(hx * sin_yaw) + fabs(hy * cos_yaw)
    cdef Py_ssize_t c0, c1, r0, r1, r, c, k
    cdef Py_ssize_t count = 0
    cdef double dx, dy, u, v, val

    _window(cx, ex, w, &c0, &c1)
    _window(cy, ey, h, &r0, &r1)
    if c0 > c1 or r0 > r1:
        acc[:] = NAN
        return acc, 0

    with nogil:
        for r in range(r0, r1 + 1):
            dy = (<double>r + 0.5) - cy
            for c in range(c0, c1 + 1):
                dx = (<double>c + 0.5) - cx
                u = dx * cos_yaw + dy * sin_yaw
                v = -dx * sin_yaw + dy * cos_yaw
                if fabs(u) > hx or fabs(v) > hy:
                    continue
                if count == 0:
                    for k in range(d):
                        a[k] = g[r, c, k]
                elif mode == MAX:
                    for k in range(d):
                        val = g[r, c, k]
                        if val > a[k]:
                            a[k] = val
                else:
                    for k in range(d):
                        a[k] += g[r, c, k]
                count += 1
        if count > 0 and mode == MEAN:
            for k in range(d):
                a[k] /= count
    if count == 0:
        acc[:] = NAN
    return acc, count

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror ``dragoon._pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, asin, sqrt, INFINITY, M_PI

cnp.import_array()

cdef double DEG = M_PI / 180.0


cdef inline double _hav(double phi1, double lam1, double cphi1,
                        double phi2, double lam2, double cphi2) nogil:
    cdef double s1 = sin(0.5 * (phi2 - phi1))
    cdef double s2 = sin(0.5 * (lam2 - lam1))
    cdef double a = s1 * s1 + cphi1 * cphi2 * s2 * s2
    if a > 1.0:
        a = 1.0
    return 2.0 * asin(sqrt(a))


def gc_distances(double lat, double lon, double[::1] lats, double[::1] lons, double radius):
    cdef Py_ssize_t i, n = lats.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double p0 = lat * DEG, l0 = lon * DEG, c0 = cos(p0), p
    with nogil:
        for i in range(n):
            p = lats[i] * DEG
            o[i] = radius * _hav(p0, l0, c0, p, lons[i] * DEG, cos(p))
    return out


def gc_mean_distance(double lat, double lon, double[::1] lats, double[::1] lons, double radius):
    cdef Py_ssize_t i, n = lats.shape[0]
    cdef double p0 = lat * DEG, l0 = lon * DEG, c0 = cos(p0), p, acc = 0.0
    if n == 0:
        return 0.0
    with nogil:
        for i in range(n):
            p = lats[i] * DEG
            acc += _hav(p0, l0, c0, p, lons[i] * DEG, cos(p))
    return radius * acc / n


def assign_nearest(double[:, ::1] hops, cnp.int64_t[::1] landmarks):
    cdef Py_ssize_t n = hops.shape[0], k = landmarks.shape[0], v, j
    owner = np.empty(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] ow = owner
    cdef double[::1] ds = dist
    cdef double best, h
    cdef cnp.int64_t arg
    with nogil:
        for v in range(n):
            best = INFINITY
            arg = -1
            for j in range(k):
                h = hops[v, landmarks[j]]
                if h < best:
                    best = h
                    arg = j
            ow[v] = arg
            ds[v] = best
    return owner, dist


def kcenter_cost(double[:, ::1] hops, cnp.int64_t[::1] landmarks):
    cdef Py_ssize_t n = hops.shape[0], k = landmarks.shape[0], v, j
    cdef double best, h, worst = 0.0, total = 0.0
    if k == 0:
        return INFINITY, INFINITY
    with nogil:
        for v in range(n):
            best = INFINITY
            for j in range(k):
                h = hops[v, landmarks[j]]
                if h < best:
                    best = h
            if best > worst:
                worst = best
            total += best
    return worst, total


def bfs_hops(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices, Py_ssize_t n):
    out = np.full((n, n), np.inf, dtype=np.float64)
    cdef double[:, ::1] d = out
    queue = np.empty(max(n, 1), dtype=np.int64)
    cdef cnp.int64_t[::1] q = queue
    cdef Py_ssize_t s, head, tail, u, e, w
    with nogil:
        for s in range(n):
            d[s, s] = 0.0
            q[0] = s
            head = 0
            tail = 1
            while head < tail:
                u = q[head]
                head += 1
                for e in range(indptr[u], indptr[u + 1]):
                    w = indices[e]
                    if d[s, w] == INFINITY:
                        d[s, w] = d[s, u] + 1.0
                        q[tail] = w
                        tail += 1
    return out

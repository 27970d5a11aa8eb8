# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled row-wise estimator kernels (same API as ``_kernels_py``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, exp, log, tanh, isfinite, INFINITY
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

BACKEND = "cython"


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const double*>a)[0]
    cdef double y = (<const double*>b)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


cdef inline void _sort(double* a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double v
    if n > 32:
        qsort(a, n, sizeof(double), _cmp_double)
        return
    for i in range(1, n):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


cdef double _select(double* a, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    # Wirth selection; afterwards a[k] is the k-th smallest and a[k+1:] >= a[k]
    cdef Py_ssize_t l = 0, m = n - 1, i, j
    cdef double x, t
    while l < m:
        x = a[k]
        i = l
        j = m
        while True:
            while a[i] < x:
                i += 1
            while x < a[j]:
                j -= 1
            if i <= j:
                t = a[i]; a[i] = a[j]; a[j] = t
                i += 1
                j -= 1
            if i > j:
                break
        if j < k:
            l = i
        if k < i:
            m = j
    return a[k]


cdef double _median_inplace(double* a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t half = n // 2, i
    cdef double lo, hi
    if n <= 32:
        _sort(a, n)
        if n % 2:
            return a[half]
        return (a[half - 1] + a[half]) / 2.0
    if n % 2:
        return _select(a, n, half)
    lo = _select(a, n, half - 1)
    hi = a[half]
    for i in range(half + 1, n):
        if a[i] < hi:
            hi = a[i]
    return (lo + hi) / 2.0


def median_rows(const double[:, ::1] x):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, j
    out = np.empty(m)
    cdef double[::1] o = out
    cdef double* buf = <double*>malloc(n * sizeof(double))
    try:
        with nogil:
            for r in range(m):
                for j in range(n):
                    buf[j] = x[r, j]
                o[r] = _median_inplace(buf, n)
    finally:
        free(buf)
    return out


def mean_rows(const double[:, ::1] x):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, j
    cdef double s
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for r in range(m):
            s = 0.0
            for j in range(n):
                s += x[r, j]
            o[r] = s / n
    return out


def sd_rows(const double[:, ::1] x):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, j
    cdef double s, mu, d
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for r in range(m):
            s = 0.0
            for j in range(n):
                s += x[r, j]
            mu = s / n
            s = 0.0
            for j in range(n):
                d = x[r, j] - mu
                s += d * d
            o[r] = sqrt(s / (n - 1))
    return out


def mad_rows(const double[:, ::1] x):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, j
    cdef double med
    out = np.empty(m)
    cdef double[::1] o = out
    cdef double* buf = <double*>malloc(n * sizeof(double))
    try:
        with nogil:
            for r in range(m):
                for j in range(n):
                    buf[j] = x[r, j]
                med = _median_inplace(buf, n)
                for j in range(n):
                    buf[j] = fabs(x[r, j] - med)
                o[r] = _median_inplace(buf, n)
    finally:
        free(buf)
    return out


def qn_rows(const double[:, ::1] x, bint order_stat):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, i, j, p
    cdef Py_ssize_t npairs = n * (n - 1) // 2
    cdef Py_ssize_t h = n // 2 + 1
    cdef Py_ssize_t kth = h * (h - 1) // 2 - 1
    out = np.empty(m)
    cdef double[::1] o = out
    cdef double* buf = <double*>malloc(max(npairs, 1) * sizeof(double))
    try:
        with nogil:
            for r in range(m):
                p = 0
                for i in range(n):
                    for j in range(i + 1, n):
                        buf[p] = fabs(x[r, i] - x[r, j])
                        p += 1
                if order_stat:
                    o[r] = _select(buf, npairs, kth)
                else:
                    o[r] = _median_inplace(buf, npairs)
    finally:
        free(buf)
    return out


def hl_rows(const double[:, ::1] x):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, i, j, p
    cdef Py_ssize_t npairs = n * (n - 1) // 2
    out = np.empty(m)
    cdef double[::1] o = out
    if n == 1:
        return np.asarray(x[:, 0]).copy()
    cdef double* buf = <double*>malloc(npairs * sizeof(double))
    try:
        with nogil:
            for r in range(m):
                p = 0
                for i in range(n):
                    for j in range(i + 1, n):
                        buf[p] = (x[r, i] + x[r, j]) / 2.0
                        p += 1
                o[r] = _median_inplace(buf, npairs)
    finally:
        free(buf)
    return out


def hd_rows(const double[:, ::1] x, const double[::1] weights):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, j
    cdef double acc
    if weights.shape[0] != n:
        raise ValueError("weights length must match row length")
    cdef const double[:, ::1] s = np.sort(x, axis=1)
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for r in range(m):
            acc = 0.0
            for j in range(n):
                acc += s[r, j] * weights[j]
            o[r] = acc
    return out


cdef inline void _mslog_g(const double* r2, Py_ssize_t n, double u, double kappa,
                          double* g, double* dg) noexcept nogil:
    cdef double t = exp(u), z, th, s = 0.0, ds = 0.0
    cdef Py_ssize_t j
    for j in range(n):
        z = 0.5 * r2[j] * t
        th = tanh(z)
        s += th
        ds += (1.0 - th * th) * z
    g[0] = s / n - kappa
    dg[0] = ds / n


def mslog_rows(const double[:, ::1] x, double kappa, double rtol=1e-10, int max_iter=200):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, j, nz
    cdef double med, s, u, lo, hi, g, dg, un, tol_u = 2.0 * rtol
    cdef int it
    cdef bint converged
    sigma = np.zeros(m)
    flag = np.zeros(m, dtype=np.int8)
    cdef double[::1] so = sigma
    cdef signed char[::1] fo = flag
    cdef double* buf = <double*>malloc(n * sizeof(double))
    cdef double* r2 = <double*>malloc(n * sizeof(double))
    try:
        with nogil:
            for r in range(m):
                for j in range(n):
                    buf[j] = x[r, j]
                med = _median_inplace(buf, n)
                for j in range(n):
                    r2[j] = (x[r, j] - med) * (x[r, j] - med)
                # sorted so the sums do not depend on element order
                _sort(r2, n)
                nz = 0
                s = 0.0
                for j in range(n):
                    s += r2[j]
                    if r2[j] > 0.0:
                        nz += 1
                if not nz > kappa * n:
                    fo[r] = 1
                    continue
                u = -log(s / n)
                lo = -INFINITY
                hi = INFINITY
                converged = False
                for it in range(max_iter):
                    _mslog_g(r2, n, u, kappa, &g, &dg)
                    if g == 0.0:
                        converged = True
                        break
                    # nan means exp overflowed: treat as overshoot
                    if g < 0.0:
                        lo = u
                    else:
                        hi = u
                    un = u - g / dg
                    if lo == -INFINITY and un < u - 2.0:
                        un = u - 2.0
                    if hi == INFINITY and un > u + 2.0:
                        un = u + 2.0
                    if not (un > lo and un < hi) or not isfinite(un):
                        if lo == -INFINITY:
                            un = u - 2.0
                        elif hi == INFINITY:
                            un = u + 2.0
                        else:
                            un = 0.5 * (lo + hi)
                    if fabs(un - u) <= tol_u:
                        u = un
                        converged = True
                        break
                    u = un
                so[r] = exp(-0.5 * u)
                if not converged:
                    fo[r] = 2
    finally:
        free(buf)
        free(r2)
    return sigma, flag


def huber_rows(const double[:, ::1] x, double c, double tol, int max_iter, double aux_const):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], r, j
    cdef double t, tn, scale, d, w, sw, swx
    cdef int it
    cdef bint converged
    out = np.empty(m)
    flag = np.zeros(m, dtype=np.int8)
    cdef double[::1] o = out
    cdef signed char[::1] fo = flag
    cdef double* buf = <double*>malloc(n * sizeof(double))
    try:
        with nogil:
            for r in range(m):
                for j in range(n):
                    buf[j] = x[r, j]
                t = _median_inplace(buf, n)
                for j in range(n):
                    buf[j] = fabs(x[r, j] - t)
                scale = aux_const * _median_inplace(buf, n)
                if not scale > 0.0:
                    o[r] = t
                    continue
                converged = False
                for it in range(max_iter):
                    sw = 0.0
                    swx = 0.0
                    for j in range(n):
                        d = fabs(x[r, j] - t) / scale
                        w = c / d if d > c else 1.0
                        sw += w
                        swx += w * x[r, j]
                    tn = swx / sw
                    if fabs(tn - t) <= tol * scale:
                        t = tn
                        converged = True
                        break
                    t = tn
                o[r] = t
                if not converged:
                    fo[r] = 2
    finally:
        free(buf)
    return out, flag

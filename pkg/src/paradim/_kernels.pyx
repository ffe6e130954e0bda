# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: inverse-branch trees, periodic-point Newton, backward chains."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, fabs, INFINITY, isfinite

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double cabs(double complex)

cnp.import_array()

BACKEND = "compiled"


cdef inline double _lae(double a, double b) noexcept nogil:
    # log(e^a + e^b), fixed operand order
    cdef double m, d
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a >= b:
        m = a
        d = b - a
    else:
        m = b
        d = a - b
    return m + log1p(exp(d))


cdef double _tree_lse(double complex c, double t, int depth, double complex w,
                      double acc, double *zmin) noexcept nogil:
    cdef double complex r
    cdef double ar, lp, lm
    if depth == 0:
        return -t * acc
    r = csqrt(w - c)
    ar = cabs(r)
    if ar < zmin[0]:
        zmin[0] = ar
    lp = _tree_lse(c, t, depth - 1, r, acc + log(2.0 * ar), zmin)
    lm = _tree_lse(c, t, depth - 1, -r, acc + log(2.0 * ar), zmin)
    return _lae(lp, lm)


def subtree_lse(double complex c, double t, int depth,
                const cnp.complex128_t[::1] roots, const double[::1] rootlogs):
    """Log-sum-exp of -t*log|(f^n)'| over the leaves below each root."""
    cdef Py_ssize_t i, m = roots.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double zmin = INFINITY
    with nogil:
        for i in range(m):
            ov[i] = _tree_lse(c, t, depth, roots[i], rootlogs[i], &zmin)
    return out, zmin


cdef void _tree_leaves(double complex c, int depth, double complex w, double acc,
                       double complex *zs, double *ls, Py_ssize_t *pos,
                       double *zmin) noexcept nogil:
    cdef double complex r
    cdef double ar, nacc
    if depth == 0:
        zs[pos[0]] = w
        ls[pos[0]] = acc
        pos[0] += 1
        return
    r = csqrt(w - c)
    ar = cabs(r)
    if ar < zmin[0]:
        zmin[0] = ar
    nacc = acc + log(2.0 * ar)
    _tree_leaves(c, depth - 1, r, nacc, zs, ls, pos, zmin)
    _tree_leaves(c, depth - 1, -r, nacc, zs, ls, pos, zmin)


def tree_leaves(double complex c, int depth,
                const cnp.complex128_t[::1] roots, const double[::1] rootlogs):
    """Leaves (in itinerary order) and their accumulated log|(f^n)'|."""
    cdef Py_ssize_t m = roots.shape[0]
    cdef Py_ssize_t per = (<Py_ssize_t>1) << depth
    zs = np.empty(m * per, dtype=np.complex128)
    ls = np.empty(m * per, dtype=np.float64)
    cdef cnp.complex128_t[::1] zv = zs
    cdef double[::1] lv = ls
    cdef Py_ssize_t i, pos = 0
    cdef double zmin = INFINITY
    with nogil:
        for i in range(m):
            _tree_leaves(c, depth, roots[i], rootlogs[i], &zv[0], &lv[0], &pos, &zmin)
    return zs, ls, zmin


def pairwise_lse(const double[::1] x):
    """Adjacent-pair log-sum-exp reduction; length must be a power of two."""
    cdef Py_ssize_t n = x.shape[0], i, h
    if n == 0:
        return -INFINITY
    buf = np.array(x, dtype=np.float64, copy=True)
    cdef double[::1] b = buf
    with nogil:
        while n > 1:
            h = n // 2
            for i in range(h):
                b[i] = _lae(b[2 * i], b[2 * i + 1])
            if n % 2:
                b[h] = b[n - 1]
                h += 1
            n = h
    return b[0]


def periodic_newton(double complex c, int n, const cnp.complex128_t[::1] seeds,
                    int maxit, double tol, double radius):
    """Newton on f^n(z) - z from every seed.

    Returns refined points, log|(f^n)'| at them, and iteration counts
    (negative when Newton failed).
    """
    cdef Py_ssize_t i, m = seeds.shape[0]
    cdef int it, j
    cdef double complex z, w, d, step
    cdef bint ok
    pts = np.empty(m, dtype=np.complex128)
    lgs = np.empty(m, dtype=np.float64)
    its = np.empty(m, dtype=np.int64)
    cdef cnp.complex128_t[::1] pv = pts
    cdef double[::1] lv = lgs
    cdef cnp.int64_t[::1] iv = its
    cdef double acc
    with nogil:
        for i in range(m):
            z = seeds[i]
            ok = False
            it = 0
            while it < maxit:
                w = z
                d = 1.0
                for j in range(n):
                    d = d * (2.0 * w)
                    w = w * w + c
                    if cabs(w) > radius:
                        break
                if not isfinite(cabs(w)) or cabs(w) > radius:
                    break
                if d == 1.0:
                    break
                step = (w - z) / (d - 1.0)
                z = z - step
                it += 1
                if cabs(step) <= tol * (1.0 + cabs(z)):
                    ok = True
                    break
            w = z
            acc = 0.0
            for j in range(n):
                acc = acc + log(2.0 * cabs(w))
                w = w * w + c
            pv[i] = z
            lv[i] = acc
            iv[i] = it if ok else -1
    return pts, lgs, its


cdef inline void _ret(const double complex *cyc, int k, double sigma, double complex w,
                      double complex *val, double complex *der) noexcept nogil:
    # F(w) = sigma * G(w / sigma), G composing u -> u^2 + 2*alpha_j*u
    cdef double complex u = w / sigma
    cdef double complex d = 1.0
    cdef int j
    for j in range(k):
        d = d * (2.0 * u + 2.0 * cyc[j])
        u = u * u + 2.0 * cyc[j] * u
    val[0] = sigma * u
    der[0] = d


def backward_chain(const cnp.complex128_t[::1] cycle, double sigma, double complex lam,
                   double complex z_start, Py_ssize_t N, int maxit, double tol):
    """Backward orbit of the normal-form return map along its repelling branch.

    Returns anchors, F' at each anchor, and the index where the chain stopped
    (N when complete).
    """
    cdef int k = cycle.shape[0]
    anchors = np.zeros(N + 1, dtype=np.complex128)
    fders = np.zeros(N + 1, dtype=np.complex128)
    cdef cnp.complex128_t[::1] av = anchors
    cdef cnp.complex128_t[::1] dv = fders
    cdef double complex z, w, val, der, step
    cdef Py_ssize_t n, stop = N
    cdef int it
    cdef bint ok
    cdef const double complex *cyc = &cycle[0]
    av[0] = z_start
    _ret(cyc, k, sigma, z_start, &val, &der)
    dv[0] = der
    with nogil:
        for n in range(N):
            z = av[n]
            w = z / lam
            ok = False
            for it in range(maxit):
                _ret(cyc, k, sigma, w, &val, &der)
                step = (val - z) / der
                w = w - step
                if cabs(step) <= tol * cabs(w):
                    ok = True
                    break
            if not ok or cabs(w + z) > 0.5 * cabs(z):
                stop = n
                break
            _ret(cyc, k, sigma, w, &val, &der)
            av[n + 1] = w
            dv[n + 1] = der
    return anchors, fders, stop

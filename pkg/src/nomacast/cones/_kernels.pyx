# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-block cone kernels (same contract as ``_kernels_py``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


cdef inline double _tail_sq(const double[:] x, Py_ssize_t a, Py_ssize_t n) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(a + 1, a + n):
        acc += x[i] * x[i]
    return acc


cdef inline double _tail_dot(const double[:] x, const double[:] y,
                             Py_ssize_t a, Py_ssize_t n) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(a + 1, a + n):
        acc += x[i] * y[i]
    return acc


def min_eig(const double[:] x, Py_ssize_t l, qs, qd):
    cdef const long[:] st = np.asarray(qs, dtype=np.int_)
    cdef const long[:] dm = np.asarray(qd, dtype=np.int_)
    cdef double t = INFINITY, u
    cdef Py_ssize_t i, k
    for i in range(l):
        if x[i] < t:
            t = x[i]
    for k in range(st.shape[0]):
        u = x[st[k]] - sqrt(_tail_sq(x, st[k], dm[k]))
        if u < t:
            t = u
    return t


def soc_jnorms(const double[:] x, Py_ssize_t l, qs, qd):
    cdef const long[:] st = np.asarray(qs, dtype=np.int_)
    cdef const long[:] dm = np.asarray(qd, dtype=np.int_)
    out_arr = np.empty(st.shape[0])
    cdef double[:] out = out_arr
    cdef double x1
    cdef Py_ssize_t k
    for k in range(st.shape[0]):
        x1 = sqrt(_tail_sq(x, st[k], dm[k]))
        out[k] = sqrt((x[st[k]] - x1) * (x[st[k]] + x1))
    return out_arr


def nt_scaling(const double[:] s, const double[:] z, Py_ssize_t l, qs, qd):
    cdef const long[:] st = np.asarray(qs, dtype=np.int_)
    cdef const long[:] dm = np.asarray(qd, dtype=np.int_)
    cdef Py_ssize_t nq = st.shape[0], total = 0, k, i, a, n
    for k in range(nq):
        total += dm[k]
    d_arr = np.empty(l)
    beta_arr = np.empty(nq)
    v_arr = np.empty(total)
    lam_arr = np.empty(l + total)
    cdef double[:] d = d_arr, beta = beta_arr, v = v_arr, lam = lam_arr
    cdef double s1, z1, ns, nz, sz, gamma, vz, b, w0, nv
    for i in range(l):
        d[i] = sqrt(s[i] / z[i])
        lam[i] = sqrt(s[i] * z[i])
    for k in range(nq):
        a = st[k]
        n = dm[k]
        s1 = sqrt(_tail_sq(s, a, n))
        z1 = sqrt(_tail_sq(z, a, n))
        ns = sqrt((s[a] - s1) * (s[a] + s1))
        nz = sqrt((z[a] - z1) * (z[a] + z1))
        sz = s[a] * z[a] / (ns * nz)
        for i in range(a + 1, a + n):
            sz += s[i] * z[i] / (ns * nz)
        gamma = sqrt(0.5 * (1.0 + sz))
        # v sits in the SOC-local index space (offset by l); it is the
        # hyperbolic half-angle of the scaling point wb = (sb + J zb) / 2 gamma
        w0 = (s[a] / ns + z[a] / nz) / (2.0 * gamma) + 1.0
        nv = sqrt(2.0 * w0)
        v[a - l] = w0 / nv
        for i in range(a + 1, a + n):
            v[i - l] = (s[i] / ns - z[i] / nz) / (2.0 * gamma) / nv
        b = sqrt(ns / nz)
        beta[k] = b
        vz = 0.0
        for i in range(a, a + n):
            vz += v[i - l] * z[i]
        lam[a] = b * (2.0 * v[a - l] * vz - z[a])
        for i in range(a + 1, a + n):
            lam[i] = b * (2.0 * v[i - l] * vz + z[i])
    return d_arr, beta_arr, v_arr, lam_arr


cdef void _apply_col(const double[:, :] X, double[:, :] out, Py_ssize_t col,
                     const double[:] d, const double[:] beta, const double[:] v,
                     Py_ssize_t l, const long[:] st, const long[:] dm,
                     bint inverse) nogil:
    cdef Py_ssize_t i, k, a, n
    cdef double acc, b
    for i in range(l):
        if inverse:
            out[i, col] = X[i, col] / d[i]
        else:
            out[i, col] = X[i, col] * d[i]
    for k in range(st.shape[0]):
        a = st[k]
        n = dm[k]
        b = beta[k]
        if not inverse:
            acc = 0.0
            for i in range(a, a + n):
                acc += v[i - l] * X[i, col]
            out[a, col] = b * (2.0 * v[a - l] * acc - X[a, col])
            for i in range(a + 1, a + n):
                out[i, col] = b * (2.0 * v[i - l] * acc + X[i, col])
        else:
            # v'Jx, then 2 Jv (v'Jx) - Jx
            acc = v[a - l] * X[a, col]
            for i in range(a + 1, a + n):
                acc -= v[i - l] * X[i, col]
            out[a, col] = (2.0 * v[a - l] * acc - X[a, col]) / b
            for i in range(a + 1, a + n):
                out[i, col] = (-2.0 * v[i - l] * acc + X[i, col]) / b


def apply_w(x, d, beta, v, Py_ssize_t l, qs, qd, bint inverse):
    cdef const long[:] st = np.asarray(qs, dtype=np.int_)
    cdef const long[:] dm = np.asarray(qd, dtype=np.int_)
    X = np.ascontiguousarray(x, dtype=np.float64).reshape(-1, 1)
    out = np.empty_like(X)
    _apply_col(X, out, 0, d, beta, v, l, st, dm, inverse)
    return out.reshape(-1)


def apply_w_mat(X, d, beta, v, Py_ssize_t l, qs, qd, bint inverse):
    cdef const long[:] st = np.asarray(qs, dtype=np.int_)
    cdef const long[:] dm = np.asarray(qd, dtype=np.int_)
    Xc = np.asarray(X, dtype=np.float64)
    out = np.empty_like(Xc)
    cdef const double[:, :] xv = Xc
    cdef double[:, :] ov = out
    cdef const double[:] dv = d, bv = beta, vv = v
    cdef Py_ssize_t col
    with nogil:
        for col in range(xv.shape[1]):
            _apply_col(xv, ov, col, dv, bv, vv, l, st, dm, inverse)
    return out


def jprod(const double[:] x, const double[:] y, Py_ssize_t l, qs, qd):
    cdef const long[:] st = np.asarray(qs, dtype=np.int_)
    cdef const long[:] dm = np.asarray(qd, dtype=np.int_)
    out_arr = np.empty(x.shape[0])
    cdef double[:] out = out_arr
    cdef Py_ssize_t i, k, a, n
    cdef double acc
    for i in range(l):
        out[i] = x[i] * y[i]
    for k in range(st.shape[0]):
        a = st[k]
        n = dm[k]
        acc = 0.0
        for i in range(a, a + n):
            acc += x[i] * y[i]
        out[a] = acc
        for i in range(a + 1, a + n):
            out[i] = x[a] * y[i] + y[a] * x[i]
    return out_arr


def jdiv(const double[:] lam, const double[:] x, Py_ssize_t l, qs, qd):
    cdef const long[:] st = np.asarray(qs, dtype=np.int_)
    cdef const long[:] dm = np.asarray(qd, dtype=np.int_)
    out_arr = np.empty(x.shape[0])
    cdef double[:] out = out_arr
    cdef Py_ssize_t i, k, a, n
    cdef double l0, l1n, det, l1x1, coef
    for i in range(l):
        out[i] = x[i] / lam[i]
    for k in range(st.shape[0]):
        a = st[k]
        n = dm[k]
        l0 = lam[a]
        l1n = sqrt(_tail_sq(lam, a, n))
        det = (l0 - l1n) * (l0 + l1n)
        l1x1 = _tail_dot(lam, x, a, n)
        coef = (l1x1 / l0 - x[a]) / det
        out[a] = (l0 * x[a] - l1x1) / det
        for i in range(a + 1, a + n):
            out[i] = x[i] / l0 + lam[i] * coef
    return out_arr


def max_step(const double[:] x, const double[:] dx, Py_ssize_t l, qs, qd):
    cdef const long[:] st = np.asarray(qs, dtype=np.int_)
    cdef const long[:] dm = np.asarray(qd, dtype=np.int_)
    cdef double amax = INFINITY, step, a, b, c, disc, r, x1n
    cdef Py_ssize_t i, k, p, n
    for i in range(l):
        if dx[i] < 0.0:
            step = -x[i] / dx[i]
            if step < amax:
                amax = step
    for k in range(st.shape[0]):
        p = st[k]
        n = dm[k]
        x1n = sqrt(_tail_sq(x, p, n))
        a = dx[p] * dx[p] - _tail_sq(dx, p, n)
        b = x[p] * dx[p] - _tail_dot(x, dx, p, n)
        c = (x[p] - x1n) * (x[p] + x1n)
        disc = b * b - a * c
        if a < 0.0:
            r = sqrt(disc if disc > 0.0 else 0.0)
            if b <= 0.0:
                step = c / (r - b)
            else:
                step = (b + r) / -a
        elif b < 0.0 and disc >= 0.0:
            step = c / (sqrt(disc) - b)
        else:
            continue
        if step < amax:
            amax = step
    return amax

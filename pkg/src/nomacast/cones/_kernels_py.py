"""Numpy implementation of the per-block cone kernels.

Every function works on the nonnegative-orthant and second-order-cone part
of a slack/dual vector laid out as ``[nonneg (l) | soc_1 | soc_2 | ...]``.
``qs`` holds the start offset of each SOC block inside that vector and
``qd`` its dimension.  The compiled twin in ``_kernels.pyx`` exposes the
same signatures; ``kernels.py`` picks one at import time.
"""
import numpy as np


def _heads(qs, l):
    return np.asarray(qs, dtype=np.intp) - l


def _tail_sq(xq, starts):
    sq = xq * xq
    sq[starts] = 0.0
    return np.add.reduceat(sq, starts)


def _tail_dot(xq, yq, starts):
    p = xq * yq
    p[starts] = 0.0
    return np.add.reduceat(p, starts)


def min_eig(x, l, qs, qd):
    """Smallest 'eigenvalue' over the orthant entries and SOC blocks."""
    t = np.inf
    if l:
        t = x[:l].min()
    if len(qd):
        xq = x[l:]
        st = _heads(qs, l)
        t = min(t, (xq[st] - np.sqrt(_tail_sq(xq, st))).min())
    return float(t)


def soc_jnorms(x, l, qs, qd):
    """``sqrt(x0^2 - ||x1||^2)`` of every SOC block."""
    if not len(qd):
        return np.empty(0)
    st = _heads(qs, l)
    xq = x[l:]
    x0, x1 = xq[st], np.sqrt(_tail_sq(xq, st))
    return np.sqrt((x0 - x1) * (x0 + x1))


def nt_scaling(s, z, l, qs, qd):
    """Nesterov-Todd scaling point for the orthant and SOC blocks.

    Returns ``(d, beta, v, lam)``: the orthant diagonal ``d``, the SOC
    scale factors ``beta`` and hyperbolic unit vectors ``v`` (so that
    ``W = beta (2 v v' - J)``), and the scaled point ``lam = W z = W^-1 s``.
    """
    d = np.sqrt(s[:l] / z[:l])
    lam = np.empty(l + int(np.sum(qd)))
    lam[:l] = np.sqrt(s[:l] * z[:l])
    if not len(qd):
        return d, np.empty(0), np.empty(0), lam
    st = _heads(qs, l)
    reps = np.asarray(qd, dtype=np.intp)
    sq, zq = s[l:], z[l:]
    ns = soc_jnorms(s, l, qs, qd)
    nz = soc_jnorms(z, l, qs, qd)
    sb = sq / np.repeat(ns, reps)
    zb = zq / np.repeat(nz, reps)
    gamma = np.sqrt(0.5 * (1.0 + np.add.reduceat(sb * zb, st)))
    jz = -zb
    jz[st] = zb[st]
    wb = (sb + jz) / np.repeat(2.0 * gamma, reps)
    # W = beta (2 v v' - J) with v the hyperbolic half-angle of wb
    wb[st] += 1.0
    v = wb / np.repeat(np.sqrt(2.0 * wb[st]), reps)
    beta = np.sqrt(ns / nz)
    lam[l:] = _apply_soc(zq, beta, v, st, reps, inverse=False)
    return d, beta, v, lam


def _apply_soc(xq, beta, v, st, reps, inverse):
    # W x = beta (2 v (v'x) - Jx);  W^-1 x = (2 Jv (v'Jx) - Jx) / beta
    jx = -xq
    jx[st] = xq[st]
    if not inverse:
        vx = np.add.reduceat(v * xq, st)
        return np.repeat(beta, reps) * (2.0 * v * np.repeat(vx, reps) - jx)
    jv = -v
    jv[st] = v[st]
    vjx = np.add.reduceat(v * jx, st)
    return (2.0 * jv * np.repeat(vjx, reps) - jx) / np.repeat(beta, reps)


def apply_w(x, d, beta, v, l, qs, qd, inverse):
    """Apply ``W`` (or ``W^-1``) to a vector."""
    out = np.empty_like(x)
    out[:l] = x[:l] / d if inverse else x[:l] * d
    if len(qd):
        st = _heads(qs, l)
        out[l:] = _apply_soc(x[l:], beta, v, st, np.asarray(qd, dtype=np.intp), inverse)
    return out


def apply_w_mat(X, d, beta, v, l, qs, qd, inverse):
    """Apply ``W`` (or ``W^-1``) to every column of ``X``."""
    out = np.empty_like(X)
    out[:l] = X[:l] / d[:, None] if inverse else X[:l] * d[:, None]
    if not len(qd):
        return out
    st = _heads(qs, l)
    reps = np.asarray(qd, dtype=np.intp)
    Xq = X[l:]
    jx = -Xq
    jx[st] = Xq[st]
    b = np.repeat(beta, reps)[:, None]
    if not inverse:
        vx = np.add.reduceat(v[:, None] * Xq, st, axis=0)
        out[l:] = b * (2.0 * v[:, None] * np.repeat(vx, reps, axis=0) - jx)
    else:
        jv = -v
        jv[st] = v[st]
        vjx = np.add.reduceat(v[:, None] * jx, st, axis=0)
        out[l:] = (2.0 * jv[:, None] * np.repeat(vjx, reps, axis=0) - jx) / b
    return out


def jprod(x, y, l, qs, qd):
    """Jordan product ``x o y``."""
    out = np.empty_like(x)
    out[:l] = x[:l] * y[:l]
    if len(qd):
        st = _heads(qs, l)
        reps = np.asarray(qd, dtype=np.intp)
        xq, yq = x[l:], y[l:]
        res = np.repeat(xq[st], reps) * yq + np.repeat(yq[st], reps) * xq
        res[st] = np.add.reduceat(xq * yq, st)
        out[l:] = res
    return out


def jdiv(lam, x, l, qs, qd):
    """Solve ``lam o u = x`` for ``u``."""
    out = np.empty_like(x)
    out[:l] = x[:l] / lam[:l]
    if len(qd):
        st = _heads(qs, l)
        reps = np.asarray(qd, dtype=np.intp)
        lq, xq = lam[l:], x[l:]
        l0, x0 = lq[st], xq[st]
        l1n = np.sqrt(_tail_sq(lq, st))
        det = (l0 - l1n) * (l0 + l1n)
        l1x1 = _tail_dot(lq, xq, st)
        coef = (l1x1 / l0 - x0) / det
        res = xq / np.repeat(l0, reps) + lq * np.repeat(coef, reps)
        res[st] = (l0 * x0 - l1x1) / det
        out[l:] = res
    return out


def max_step(x, dx, l, qs, qd):
    """Largest ``a`` with ``x + a dx`` in the cone (``x`` interior); inf if unbounded."""
    amax = np.inf
    if l:
        neg = dx[:l] < 0
        if neg.any():
            amax = float(np.min(-x[:l][neg] / dx[:l][neg]))
    if not len(qd):
        return amax
    st = _heads(qs, l)
    xq, dq = x[l:], dx[l:]
    x0, d0 = xq[st], dq[st]
    x1n = np.sqrt(_tail_sq(xq, st))
    a = d0 * d0 - _tail_sq(dq, st)
    b = x0 * d0 - _tail_dot(xq, dq, st)
    c = (x0 - x1n) * (x0 + x1n)
    disc = b * b - a * c
    r = np.sqrt(np.maximum(disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        neg_a = np.where(b <= 0.0, c / (r - b), (b + r) / -a)
        pos_a = np.where((b < 0.0) & (disc >= 0.0), c / (r - b), np.inf)
    steps = np.where(a < 0.0, neg_a, pos_a)
    if steps.size:
        amax = min(amax, float(steps.min()))
    return float(amax)

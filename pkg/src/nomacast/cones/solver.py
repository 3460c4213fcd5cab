"""Primal-dual interior-point solver for symmetric cone programs.

The method works on the homogeneous self-dual embedding of the program and
its dual, uses Nesterov-Todd scaling for every cone block and a Mehrotra
predictor-corrector step.  Zero-cone rows are treated as equality
constraints.  Each Newton system is written in
scaled form as a regularized quasidefinite matrix, factored densely and
refined iteratively against the unregularized system.
"""
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from . import kernels, psd
from .program import ConeProgram, ConeSolution, NonNeg, PSD, SecondOrder, Status, Zero


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    reg: float = 1e-9
    max_iter: int = 200
    refine: int = 3
    step_frac: float = 0.99
    equilibrate: bool = True
    history: bool = False    # keep per-iteration (pres, dres, gap, step) in info
    reduced_tol: float = 1e-6  # accuracy reported as ALMOST_OPTIMAL when progress stalls
    stall_iters: int = 5       # iterations without a better iterate before giving up


DEFAULT_OPTIONS = SolverOptions()


class _Layout:
    """Row bookkeeping: equality rows first, then orthant, SOC and PSD rows."""

    def __init__(self, cones):
        eq, nonneg, soc, sd = [], [], [], []
        off = 0
        for k in cones:
            rows = np.arange(off, off + k.rows)
            if isinstance(k, Zero):
                eq.append(rows)
            elif isinstance(k, NonNeg):
                nonneg.append(rows)
            elif isinstance(k, SecondOrder):
                soc.append(rows)
            else:
                sd.append((k.side, rows))
            off += k.rows
        cat = lambda parts: np.concatenate(parts) if parts else np.zeros(0, dtype=int)
        self.eq_rows = cat(eq)
        self.l = int(sum(len(r) for r in nonneg))
        self.qd = np.array([len(r) for r in soc], dtype=np.int_)
        self.qs = (self.l + np.concatenate([[0], np.cumsum(self.qd)[:-1]])).astype(np.int_) \
            if len(soc) else np.zeros(0, dtype=np.int_)
        self.ls = self.l + int(self.qd.sum())
        self.sides = [side for side, _ in sd]
        offs, pos = [], self.ls
        for side in self.sides:
            offs.append(pos)
            pos += psd.svec_dim(side)
        self.psd_offsets = offs
        self.cone_rows = cat(nonneg + soc + [r for _, r in sd])
        self.m = len(self.cone_rows)
        self.degree = self.l + len(self.qd) + sum(self.sides)
        # blocks used for row equilibration (orthant rows are their own block)
        blocks = [np.array([i]) for i in range(self.l)]
        for a, d in zip(self.qs, self.qd):
            blocks.append(np.arange(a, a + d))
        for a, side in zip(self.psd_offsets, self.sides):
            blocks.append(np.arange(a, a + psd.svec_dim(side)))
        self.blocks = blocks
        self.psd_slices = [(slice(a, a + psd.svec_dim(side)), side)
                           for a, side in zip(self.psd_offsets, self.sides)]
        # SOC heads relative to the start of the SOC rows, and block sizes
        self.heads = np.asarray(self.qs, dtype=np.intp) - self.l
        self.reps = np.asarray(self.qd, dtype=np.intp)

    def _psd_slices(self):
        return self.psd_slices

    def identity(self):
        e = np.zeros(self.m)
        e[:self.l] = 1.0
        e[self.qs] = 1.0
        for sl, side in self._psd_slices():
            e[sl] = psd.identity(side)
        return e

    def min_eig(self, x):
        t = kernels.min_eig(x, self.l, self.qs, self.qd) if self.ls else np.inf
        for sl, side in self._psd_slices():
            t = min(t, psd.min_eig(x[sl], side))
        return t

    def jprod(self, x, y):
        out = np.empty(self.m)
        out[:self.ls] = kernels.jprod(x[:self.ls], y[:self.ls], self.l, self.qs, self.qd)
        for sl, side in self._psd_slices():
            out[sl] = psd.jprod(x[sl], y[sl], side)
        return out

    def dual_violation(self, y):
        """Distance-like measure of how far ``y`` is outside the (self-dual) cone."""
        viol = 0.0
        if self.l:
            viol = max(viol, float(np.max(-y[:self.l], initial=0.0)))
        for a, d in zip(self.qs, self.qd):
            viol = max(viol, float(np.linalg.norm(y[a + 1:a + d]) - y[a]))
        for sl, side in self._psd_slices():
            viol = max(viol, -psd.min_eig(y[sl], side))
        return viol


def _tail_norms(xq, heads):
    sq = xq * xq
    sq[heads] = 0.0
    return np.sqrt(np.add.reduceat(sq, heads))


class _Scaling:
    """NT scaling of all cone blocks at the point ``(s, z)``."""

    def __init__(self, lay, s, z, lq=None):
        self.lay = lay
        ls = lay.ls
        if lq is None:
            lq = kernels.nt_scaling(s[:ls], z[:ls], lay.l, lay.qs, lay.qd)
        self.d, self.beta, self.v, lam_lq = lq
        self.lam = np.empty(lay.m)
        self.lam[:ls] = lam_lq
        self.psd = []
        for sl, side in lay._psd_slices():
            sc = psd.PSDScaling(s[sl], z[sl], side)
            self.psd.append(sc)
            self.lam[sl] = sc.lam_svec
        if not np.all(np.isfinite(self.lam)):
            raise np.linalg.LinAlgError("scaling point left the cone")

    def updated(self, st, zt, s, z):
        """Scaling at the new iterate ``(s, z) = (W' st, W^-1 zt)``.

        The orthant and SOC parts are composed from the current scaling and
        that of the scaled points ``(st, zt)``, which stay well inside the
        cone; recomputing them from ``s`` and ``z`` loses the J-norms to
        cancellation once the iterates approach the boundary.
        """
        lay = self.lay
        ls, l = lay.ls, lay.l
        dt, bt, vt, lt = kernels.nt_scaling(st[:ls], zt[:ls], l, lay.qs, lay.qd)
        if not np.all(np.isfinite(lt)):
            raise np.linalg.LinAlgError("scaled point left the cone")
        d = self.d * dt
        lam = lt
        beta, v = self.beta, self.v
        if len(lay.qd):
            h, reps = lay.heads, lay.reps
            # scaling points: w~ = 2 v~0 v~ - e0, composed w = (2 v v' - J) w~
            wt = 2.0 * np.repeat(vt[h], reps) * vt
            wt[h] -= 1.0
            w = kernels.apply_w(np.concatenate([np.zeros(l), wt]), np.ones(l),
                                np.ones(len(h)), v, l, lay.qs, lay.qd, False)[l:]
            w[h] += 1.0
            v = w / np.repeat(np.sqrt(2.0 * w[h]), reps)
            beta = beta * bt
            # lam is lt up to a rotation of each tail: take the direction from
            # W_new W^-1 zt and the head and tail length from lt
            raw = kernels.apply_w(self._lq(zt, True), d, beta, v, l, lay.qs, lay.qd, False)[l:]
            tq = lt[l:]
            tr, tt = _tail_norms(raw, h), _tail_norms(tq, h)
            ratio = np.divide(tt, tr, out=np.zeros_like(tt), where=tr > 0)
            lq = raw * np.repeat(ratio, reps)
            lq[h] = tq[h]
            lam = np.concatenate([lt[:l], lq])
        return _Scaling(lay, s, z, (d, beta, v, lam))

    def _lq(self, x, inverse):
        lay = self.lay
        return kernels.apply_w(x[:lay.ls], self.d, self.beta, self.v,
                               lay.l, lay.qs, lay.qd, inverse)

    def w_inv_trans(self, x):
        out = np.empty_like(x)
        out[:self.lay.ls] = self._lq(x, True)
        for (sl, _), sc in zip(self.lay._psd_slices(), self.psd):
            out[sl] = sc.w_inv_trans(x[sl])
        return out

    def w_inv(self, x):
        out = np.empty_like(x)
        out[:self.lay.ls] = self._lq(x, True)
        for (sl, _), sc in zip(self.lay._psd_slices(), self.psd):
            out[sl] = sc.w_inv(x[sl])
        return out

    def w_trans(self, x):
        out = np.empty_like(x)
        out[:self.lay.ls] = self._lq(x, False)
        for (sl, _), sc in zip(self.lay._psd_slices(), self.psd):
            out[sl] = sc.w_trans(x[sl])
        return out

    def w_inv_trans_mat(self, G):
        lay = self.lay
        out = np.empty_like(G)
        out[:lay.ls] = kernels.apply_w_mat(G[:lay.ls], self.d, self.beta, self.v,
                                           lay.l, lay.qs, lay.qd, True)
        for (sl, _), sc in zip(lay._psd_slices(), self.psd):
            out[sl] = sc.w_inv_trans_mat(G[sl])
        return out

    def jdiv_lam(self, x):
        """Solve ``lam o u = x``."""
        lay = self.lay
        out = np.empty_like(x)
        out[:lay.ls] = kernels.jdiv(self.lam[:lay.ls], x[:lay.ls], lay.l, lay.qs, lay.qd)
        for (sl, side), sc in zip(lay._psd_slices(), self.psd):
            out[sl] = psd.jdiv_diag(sc.lam, x[sl], side)
        return out

    def lam_sq(self):
        lay = self.lay
        out = np.empty(lay.m)
        out[:lay.ls] = kernels.jprod(self.lam[:lay.ls], self.lam[:lay.ls], lay.l, lay.qs, lay.qd)
        for (sl, side), sc in zip(lay._psd_slices(), self.psd):
            out[sl] = psd.svec(np.diag(sc.lam ** 2))
        return out

    def max_step(self, dx):
        lay = self.lay
        a = kernels.max_step(self.lam[:lay.ls], dx[:lay.ls], lay.l, lay.qs, lay.qd) \
            if lay.ls else np.inf
        for (sl, side), sc in zip(lay._psd_slices(), self.psd):
            a = min(a, psd.max_step_diag(sc.lam, dx[sl], side))
        return a


class _KKT:
    """Factor/solve ``[0 A' G'; A 0 0; G 0 -W'W]``.

    The system is rewritten in the scaled variable ``W uz`` with
    ``Gs = W^-T G``.  It is first reduced to the normal equations
    ``Gs' Gs`` (cheap: side ``n``).  Near the optimum ``W`` degenerates and
    the normal equations square an already large condition number; once the
    refined residual shows that, the solver switches for good to the
    augmented quasidefinite matrix ``[dI A' Gs'; A -dI 0; Gs 0 -I]``.
    """

    SWITCH_TOL = 1e-10

    def __init__(self, A, G, reg, refine):
        self.A, self.G = A, G
        self.n = G.shape[1]
        self.p = A.shape[0]
        self.m = G.shape[0]
        self.reg = reg
        self.refine = refine
        self.augmented = False
        self.sc = None

    def factor(self, scaling):
        self.sc = scaling
        self.Gs = scaling.w_inv_trans_mat(self.G) if scaling is not None else self.G
        if not self.augmented:
            try:
                self._factor_normal()
                return
            except np.linalg.LinAlgError:
                self.augmented = True
        self._factor_augmented()

    def _factor_normal(self):
        n, p = self.n, self.p
        H = self.Gs.T @ self.Gs
        if p == 0:
            self.K = H
            self._chol = sla.cho_factor(H + self.reg * np.eye(n), check_finite=False)
            return
        K = np.zeros((n + p, n + p))
        K[:n, :n] = H
        K[:n, n:] = self.A.T
        K[n:, :n] = self.A
        self.K = K
        self._chol = None
        self._lu = self._lu_regularized(K, np.r_[np.ones(n), -np.ones(p)])

    def _factor_augmented(self):
        n, p, m = self.n, self.p, self.m
        K = np.zeros((n + p + m, n + p + m))
        K[:n, n:n + p] = self.A.T
        K[n:n + p, :n] = self.A
        K[:n, n + p:] = self.Gs.T
        K[n + p:, :n] = self.Gs
        K[n + p:, n + p:] = -np.eye(m)
        self.K = K
        self._chol = None
        self._lu = self._lu_regularized(K, np.r_[np.ones(n), -np.ones(p), np.zeros(m)])

    def _lu_regularized(self, K, signs):
        # escalate the static regularization when the matrix is (numerically)
        # singular; refinement against the unregularized matrix recovers accuracy
        for bump in (1.0, 1e2, 1e4, 1e6):
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error", sla.LinAlgWarning)
                    return sla.lu_factor(K + np.diag(self.reg * bump * signs), check_finite=False)
            except (np.linalg.LinAlgError, sla.LinAlgWarning):
                continue
        raise np.linalg.LinAlgError("KKT system indefinite beyond regularization")

    def _raw(self, rhs):
        if self._chol is not None:
            return sla.cho_solve(self._chol, rhs, check_finite=False)
        return sla.lu_solve(self._lu, rhs, check_finite=False)

    def _refined(self, rhs):
        u = self._raw(rhs)
        floor = 1e-15 * max(1.0, _norm(rhs))
        prev, u_prev = np.inf, u
        for _ in range(self.refine):
            res = rhs - self.K @ u
            r = _norm(res)
            # stop at the floor or once refinement has stagnated
            if r > prev:
                return u_prev
            if r <= floor or r > 0.5 * prev:
                break
            prev, u_prev = r, u
            u = u + self._raw(res)
        return u

    def solve(self, r1, r2, r3):
        """Return ``(ux, uy, W uz)``."""
        n, p = self.n, self.p
        r3s = self.sc.w_inv_trans(r3) if self.sc is not None else r3
        if not self.augmented:
            rhs = np.concatenate([r1 + self.Gs.T @ r3s, r2])
            u = self._refined(rhs)
            ux, uy = u[:n], u[n:]
            wuz = self.Gs @ ux - r3s
            # residual of the first block row of the unreduced system
            res = _norm(self.Gs.T @ wuz + (self.A.T @ uy if p else 0.0) - r1)
            scale = max(1.0, _norm(r1), _norm(r3s), _norm(r2))
            if res <= self.SWITCH_TOL * scale:
                return ux, uy, wuz
            self.augmented = True
            self._factor_augmented()
        u = self._refined(np.concatenate([r1, r2, r3s]))
        return u[:n], u[n:n + p], u[n + p:]


def _equilibrate(lay, A, b, G, h):
    def scale_of(M, v):
        top = np.max(np.abs(M), axis=1, initial=0.0) if M.size else np.zeros(len(v))
        return np.maximum(top, np.abs(v))

    eq_scale = np.ones(A.shape[0])
    if A.shape[0]:
        t = scale_of(A, b)
        eq_scale = np.where(t > 0, 1.0 / np.where(t > 0, t, 1.0), 1.0)
    cone_scale = np.ones(G.shape[0])
    if G.shape[0]:
        t = scale_of(G, h)
        for blk in lay.blocks:
            top = t[blk].max()
            if top > 0:
                cone_scale[blk] = 1.0 / top
    eq_scale = np.clip(eq_scale, 1e-8, 1e8)
    cone_scale = np.clip(cone_scale, 1e-8, 1e8)
    return eq_scale, cone_scale


def _norm(v):
    return math.sqrt(float(v @ v)) if v.size else 0.0


def solve(program: ConeProgram, opts: SolverOptions = None, **overrides) -> ConeSolution:
    """Solve a :class:`ConeProgram`; never raises for infeasible/unbounded input."""
    opts = opts or DEFAULT_OPTIONS
    if overrides:
        opts = replace(opts, **overrides)
    lay = _Layout(program.cones)
    Afull = program.dense_A()
    A = Afull[lay.eq_rows]
    b = program.b[lay.eq_rows]
    G = Afull[lay.cone_rows]
    h = program.b[lay.cone_rows]
    c = program.c
    if opts.equilibrate:
        eq_scale, cone_scale = _equilibrate(lay, A, b, G, h)
    else:
        eq_scale, cone_scale = np.ones(len(b)), np.ones(len(h))
    A_s, b_s = A * eq_scale[:, None], b * eq_scale
    G_s, h_s = G * cone_scale[:, None], h * cone_scale

    m = program.m

    def expand(y, z, s):
        y_full = np.zeros(m)
        s_full = np.zeros(m)
        y_full[lay.eq_rows] = y * eq_scale
        y_full[lay.cone_rows] = z * cone_scale
        s_full[lay.cone_rows] = s / cone_scale
        return y_full, s_full

    def accept(x, y, z, s):
        # the stopping test must also hold for the unequilibrated data
        yf, sf = expand(y, z, s)
        pres, dres, gap = relative_residuals(program, x, yf, sf, lay=lay)
        return pres <= opts.feas_tol and dres <= opts.feas_tol and gap <= opts.gap_tol

    status, x, y, z, s, it, info = _hsde(c, A_s, b_s, G_s, h_s, lay, opts, accept)
    y_full, s_full = expand(y, z, s)

    if status is Status.INFEASIBLE:
        x = np.full(program.n, np.nan)
        s_full = np.full(m, np.nan)
    elif status is Status.UNBOUNDED:
        y_full = np.full(m, np.nan)

    pres, dres, gap = relative_residuals(program, x, y_full, s_full, lay=lay)
    if status is Status.ALMOST_OPTIMAL and not max(pres, dres, gap) <= opts.reduced_tol:
        status = Status.NUMERICAL_FAILURE
    return ConeSolution(
        status=status, x=x, y=y_full, s=s_full, gap=gap,
        primal_res=pres, dual_res=dres, iterations=it,
        pcost=float(c @ x) if status is not Status.INFEASIBLE else np.nan,
        dcost=float(-program.b @ y_full) if status is not Status.UNBOUNDED else np.nan,
        info=info,
    )


def relative_residuals(program, x, y, s, lay=None):
    """:func:`residuals_of` normalized the way the stopping test is.

    Primal by ``max(1, ||b||)``, dual by ``max(1, ||c||)`` and the gap by
    ``max(1, min(|c.x|, |b.y|))``.  Certificates are normalized already.
    """
    pres, dres, gap = residuals_of(program, x, y, s, lay=lay)
    if np.all(np.isfinite(x)) and np.all(np.isfinite(y)):
        pres /= max(1.0, _norm(program.b))
        dres /= max(1.0, _norm(program.c))
        gap /= max(1.0, min(abs(float(program.c @ x)), abs(float(program.b @ y))))
    return pres, dres, gap


def kkt_residuals(program, sol):
    """Primal residual, dual residual and gap of ``sol`` for ``program``."""
    return residuals_of(program, sol.x, sol.y, sol.s)


def residuals_of(program, x, y, s, lay=None):
    """``(||Ax + s - b||, ||A'y + c|| + dual-cone violation, |c.x + b.y|)``.

    For a certificate of infeasibility (``x`` all NaN) the dual residual
    measures ``||A'y||`` instead and the gap is ``|b.y + 1|``; for an
    unboundedness ray it is the mirror image.
    """
    lay = lay or _Layout(program.cones)
    A = program.dense_A()
    c, b = program.c, program.b
    x_ok = np.all(np.isfinite(x))
    y_ok = np.all(np.isfinite(y))
    cone_y = y[lay.cone_rows]
    if x_ok and y_ok:
        pres = _norm(A @ x + s - b)
        dres = _norm(A.T @ y + c) + lay.dual_violation(cone_y)
        gap = abs(float(c @ x + b @ y))
    elif y_ok:
        pres = np.nan
        dres = _norm(A.T @ y) + lay.dual_violation(cone_y)
        gap = abs(float(b @ y) + 1.0)
    elif x_ok:
        pres = _norm(A @ x + s)
        dres = np.nan
        gap = abs(float(c @ x) + 1.0)
    else:
        pres = dres = gap = np.nan
    return pres, dres, gap


def _hsde(c, A, b, G, h, lay, opts, accept=None):
    n, p, m = c.size, A.shape[0], G.shape[0]
    kkt = _KKT(A, G, opts.reg, opts.refine)
    e = lay.identity()
    info = {"backend": kernels.BACKEND}

    # starting point from two least-squares style solves with W = I
    try:
        kkt.factor(None)
        x, _, zt = kkt.solve(np.zeros(n), b, h)
        s = -zt
        _, y, z = kkt.solve(-c, np.zeros(p), np.zeros(m))
    except (np.linalg.LinAlgError, ValueError):
        return (Status.NUMERICAL_FAILURE, np.zeros(n), np.zeros(p), np.zeros(m),
                np.zeros(m), 0, info)
    if m:
        ts = lay.min_eig(s)
        if ts <= 1e-8 * max(1.0, _norm(s)):
            s = s + (1.0 - ts) * e
        tz = lay.min_eig(z)
        if tz <= 1e-8 * max(1.0, _norm(z)):
            z = z + (1.0 - tz) * e
    tau, kappa = 1.0, 1.0
    nxt = None

    nb, nh, nc = max(1.0, _norm(b)), max(1.0, _norm(h)), max(1.0, _norm(c))
    degree = lay.degree
    stalls = 0
    last = None
    best, best_merit, since_best = None, np.inf, 0

    def stop(status, reason=None):
        # fall back to the best iterate when it meets the reduced tolerance
        if reason is not None:
            info["reason"] = reason
        if best is not None and best_merit <= opts.reduced_tol:
            info["best_merit"] = best_merit
            return (Status.ALMOST_OPTIMAL, *best, it, info)
        return (status, *last, it, info)
    hist = [] if opts.history else None
    if hist is not None:
        info["history"] = hist
    for it in range(opts.max_iter + 1):
        Aty = A.T @ y if p else np.zeros(n)
        Gtz = G.T @ z
        Ax = A @ x if p else np.zeros(0)
        Gx = G @ x
        cx, by, hz = float(c @ x), float(b @ y), float(h @ z)
        rx = Aty + Gtz + c * tau
        ry = Ax - b * tau
        rz = Gx + s - h * tau
        rt = kappa + cx + by + hz
        sz = float(s @ z)
        mu = (sz + tau * kappa) / (degree + 1)

        pres = max(_norm(ry) / nb, _norm(rz) / nh) / tau
        dres = _norm(rx) / nc / tau
        pcost, dcost = cx / tau, -(by + hz) / tau
        gap = sz / tau ** 2
        last = (x / tau, y / tau, z / tau, s / tau)
        info.update(pres=pres, dres=dres, gap=gap)
        if (pres <= opts.feas_tol and dres <= opts.feas_tol
                and gap <= opts.gap_tol * max(1.0, min(abs(pcost), abs(dcost)))
                and (accept is None or accept(*last))):
            return (Status.OPTIMAL, *last, it, info)
        merit = max(pres, dres, gap / max(1.0, min(abs(pcost), abs(dcost))))
        if merit < best_merit:
            best, best_merit, since_best = last, merit, 0
        else:
            since_best += 1
            if since_best >= opts.stall_iters and best_merit <= opts.reduced_tol:
                return stop(Status.NUMERICAL_FAILURE, "no further progress")
        if by + hz < 0:
            ray = _norm(Aty + Gtz) / (-(by + hz))
            if ray <= opts.feas_tol:
                k = -(by + hz)
                return (Status.INFEASIBLE, x, y / k, z / k, s, it, info)
        if cx < 0:
            ray = max(_norm(Ax), _norm(Gx + s)) / (-cx)
            if ray <= opts.feas_tol:
                k = -cx
                return (Status.UNBOUNDED, x / k, y, z, s / k, it, info)
        if it == opts.max_iter:
            break

        try:
            sc = _Scaling(lay, s, z) if nxt is None else nxt
            kkt.factor(sc)
            x2, y2, zt2 = kkt.solve(-c, b, h)
        except (np.linalg.LinAlgError, ValueError) as exc:
            return stop(Status.NUMERICAL_FAILURE, f"factorization: {exc}")
        z2 = sc.w_inv(zt2)
        denom = float(c @ x2 + b @ y2 + h @ z2) - kappa / tau
        if not np.isfinite(denom) or denom == 0.0:
            return stop(Status.NUMERICAL_FAILURE, "degenerate tau equation")

        lam_sq = sc.lam_sq()
        sigma = 0.0
        dsa = dza = None
        dtau_a = dkap_a = 0.0
        for phase in (0, 1):
            f = 1.0 - sigma
            if phase == 0:
                ds = -lam_sq
                dk = -tau * kappa
            else:
                ds = -lam_sq + sigma * mu * e - lay.jprod(dsa, dza)
                dk = -tau * kappa + sigma * mu - dtau_a * dkap_a
            q = sc.jdiv_lam(ds)
            r4 = -f * rt - dk / tau
            try:
                x1, y1, zt1 = kkt.solve(-f * rx, -f * ry, -f * rz - sc.w_trans(q))
            except (np.linalg.LinAlgError, ValueError) as exc:
                return stop(Status.NUMERICAL_FAILURE, f"solve: {exc}")
            z1 = sc.w_inv(zt1)
            dtau = (r4 - float(c @ x1 + b @ y1 + h @ z1)) / denom
            dx = x1 + dtau * x2
            dy = y1 + dtau * y2
            dzt = zt1 + dtau * zt2
            dst = q - dzt
            dkap = (dk - kappa * dtau) / tau
            alpha = min(sc.max_step(dst), sc.max_step(dzt))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkap < 0:
                alpha = min(alpha, -kappa / dkap)
            if phase == 0:
                alpha_a = min(1.0, alpha)
                sigma = (1.0 - alpha_a) ** 3
                dsa, dza, dtau_a, dkap_a = dst, dzt, dtau, dkap
            else:
                alpha = min(1.0, opts.step_frac * alpha)

        if not np.isfinite(alpha) or alpha <= 1e-12:
            stalls += 1
            if stalls >= 3:
                return stop(Status.NUMERICAL_FAILURE, "step length collapsed")
            nxt = sc
            continue
        stalls = 0
        if hist is not None:
            hist.append((pres, dres, gap, alpha, tau, kappa, kkt.augmented))
        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * sc.w_inv(dzt)
        # the slack step from the linearized primal equation itself; going
        # through W' (q - dzt) amplifies rounding by the conditioning of W
        s = s + alpha * (h * dtau - f * rz - G @ dx)
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkap
        try:
            nxt = sc.updated(sc.lam + alpha * dst, sc.lam + alpha * dzt, s, z)
        except (np.linalg.LinAlgError, ValueError):
            nxt = None

    it = opts.max_iter
    return stop(Status.MAX_ITER)

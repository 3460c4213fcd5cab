"""Energy-efficiency maximization after a new (nearest) group joins.

The upgraded system serves the ``G`` original groups at fixed thresholds
and adds one beam for the new group, decoded last.  Energy efficiency is

    EE = (R_ori + log2(1 + min_u |h_u,new^H w_new|^2 / noise)) / (P_t + P_c)

with powers in watts, i.e. bits/Joule/Hz.  The MM iteration writes EE as
``sqrt(t)`` with ``R_ori + r >= sqrt(t z)`` and ``P_t + P_c <= sqrt(z)``,
replaces ``sqrt(t z)`` by its tangent plane (a majorizer, since the function
is concave) and the SINR rows by their usual minorizers.  For a fixed rate
``r`` of the new group the surrogate problem collapses to a minimum-power
SOCP, which leaves a concave scalar problem in ``r``.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cones
from .channel import (BeamformerSet, ChannelRealization, check_constraints, noma_constraints)
from .modeling import (Block, MMTrace, ProgramBuilder, phi, phi_rows, power_epigraph,
                       socp_init_rows, taylor_minorizer, unembed)
from .powermin import FAILED, INFEASIBLE, OK, MMPowerProblem

MW_PER_W = 1000.0


@dataclass(frozen=True)
class EESpec:
    """Upgraded system: the last group of ``realization`` is the new group.

    ``thresholds`` holds the SINR targets of the original groups, ``p_c`` and
    ``p_tot`` are in mW.  ``search`` picks the scalar method over the new-group
    rate: ``"slope"`` (bracketing on the dual-derived derivative) or
    ``"golden"`` (derivative-free golden section).
    """
    realization: ChannelRealization
    thresholds: tuple
    p_c: float
    p_tot: float
    mm_tol: float = 1e-4
    max_mm_iters: int = 50
    r_tol: float = 1e-5
    search: str = "slope"

    def __post_init__(self):
        thr = tuple(float(t) for t in self.thresholds)
        object.__setattr__(self, "thresholds", thr)
        if len(thr) != self.realization.groups - 1:
            raise ValueError(f"need {self.realization.groups - 1} thresholds, got {len(thr)}")
        if any(not t > 0 for t in thr):
            raise ValueError("thresholds must be positive")
        if not self.p_c > 0:
            raise ValueError("circuit power must be positive")
        if not self.p_tot > 0:
            raise ValueError("power budget must be positive")
        if self.search not in ("slope", "golden"):
            raise ValueError(f"unknown search {self.search!r}")

    @classmethod
    def from_rates(cls, realization, rate, p_c, p_tot, **kw):
        G = realization.groups - 1
        rates = np.broadcast_to(np.asarray(rate, dtype=float), (G,))
        return cls(realization, tuple(2.0 ** rates - 1.0), p_c, p_tot, **kw)

    @property
    def original_groups(self):
        return self.realization.groups - 1

    @property
    def r_ori(self):
        return float(np.sum(np.log2(1.0 + np.asarray(self.thresholds))))


@dataclass
class EEResult:
    status: str
    beams: Optional[BeamformerSet]
    ee: float
    trace: MMTrace = field(default_factory=MMTrace)
    rate_new: float = 0.0      # log2(1 + min new-group SINR) of the returned beams
    r: float = 0.0             # auxiliary rate of the last surrogate problem
    t: float = 0.0
    z: float = 0.0

    @property
    def ok(self):
        return self.status == OK

    @property
    def power(self):
        return np.inf if self.beams is None else self.beams.total_power

    r_ori: float = 0.0

    @property
    def sum_rate(self):
        return float("nan") if self.beams is None else self.r_ori + self.rate_new


def _stack(W):
    return W.stacked() if isinstance(W, BeamformerSet) else np.atleast_2d(W)


def new_group_sinr(W, spec: EESpec):
    """Smallest ``|h^H w_new|^2 / noise`` over the new group (all else cancelled)."""
    Ws = _stack(W)
    h = spec.realization.h[-1]
    return float(np.min(np.abs(h.conj() @ Ws[-1]) ** 2) / spec.realization.noise_power)


def ee_value(W, spec: EESpec):
    """Energy efficiency in bits/Joule/Hz; powers in the denominator are in watts."""
    Ws = _stack(W)
    rate = spec.r_ori + np.log2(1.0 + new_group_sinr(Ws, spec))
    return float(rate / ((np.sum(np.abs(Ws) ** 2) + spec.p_c) / MW_PER_W))


def sqrt_tz_majorizer(t0, z0):
    """Tangent plane of ``sqrt(t z)`` at ``(t0, z0)`` as ``(a, b_t, b_z)``.

    ``sqrt(t z) <= a + b_t t + b_z z`` for all positive ``(t, z)`` because the
    geometric mean is concave; ``a`` is zero by homogeneity but kept explicit.
    """
    if not (t0 > 0 and z0 > 0):
        raise ValueError("expansion point must be positive")
    r = np.sqrt(t0 * z0)
    bt = 0.5 * np.sqrt(z0 / t0)
    bz = 0.5 * np.sqrt(t0 / z0)
    return r - bt * t0 - bz * z0, bt, bz


def golden_section_max(f, lo, hi, tol):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; ``-inf`` values count as low.

    Returns ``(x, f(x))`` for the best point evaluated.
    """
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    best = max([(fc, c), (fd, d)])
    while b - a > tol:
        if fc >= fd and not (fc == -np.inf and fd == -np.inf):
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
            best = max(best, (fc, c))
        elif fc == -np.inf and fd == -np.inf:
            # both probes infeasible: the feasible part lies to the left
            b = c
            c, d = b - inv * (b - a), a + inv * (b - a)
            fc, fd = f(c), f(d)
            best = max(best, (fc, c), (fd, d))
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
            best = max(best, (fd, d))
    return best[1], best[0]


def decreasing_root(f, lo, hi, tol, x0=None, f_lo=None):
    """Largest ``x`` in ``[lo, hi]`` with ``f(x) >= 0`` for a non-increasing ``f``.

    ``f`` may return ``-inf`` where it is undefined (always to the right).
    Uses bracketed secant steps (Illinois variant) with bisection fallback.
    Returns the final bracket ``(a, b)``; ``a`` satisfies ``f(a) >= 0`` unless
    ``f(lo) < 0``, in which case ``(lo, lo)`` is returned.
    """
    a, b = float(lo), float(hi)
    fa = f(a) if f_lo is None else f_lo
    if fa < 0:
        return a, a
    fb = None                      # unknown at the upper end
    side = 0
    x = x0
    while b - a > tol:
        if x is None or not a < x < b:
            if fb is not None and np.isfinite(fb) and np.isfinite(fa):
                x = a + (b - a) * fa / (fa - fb)
                if not a < x < b:
                    x = 0.5 * (a + b)
            else:
                x = 0.5 * (a + b)
        # keep the probe away from the ends so the bracket always shrinks
        x = min(max(x, a + 0.25 * tol), b - 0.25 * tol)
        fx = f(x)
        if fx >= 0:
            a, fa = x, fx
            if side == 1 and fb is not None and np.isfinite(fb):
                fb *= 0.5
            side = 1
        else:
            b, fb = x, fx
            if side == -1 and np.isfinite(fa):
                fa *= 0.5
            side = -1
        x = None
    return a, b


class _EEProblem:
    """Surrogate problems of the EE iteration and the full-power variant."""

    def __init__(self, spec: EESpec):
        rz = spec.realization
        self.spec = spec
        self.G = spec.original_groups
        self.nb = self.G + 1
        self.M = rz.geometry.antennas
        self.h = rz.normalized()
        users = rz.geometry.users_per_region
        cons = noma_constraints(users, tuple(spec.thresholds) + (0.0,))
        self.base = MMPowerProblem(self.h, cons, self.nb, self.M)
        self.h_new = self.h[-1]
        self.p_c_w = spec.p_c / MW_PER_W
        gain = np.min(np.sum(np.abs(self.h_new) ** 2, axis=1))
        self.v_max = float(gain * spec.p_tot)

    # -- building blocks -------------------------------------------------
    def surrogate_gain_bound(self, W):
        """Largest gain level any in-budget point can reach in the surrogate rows.

        ``2 p.phi - |p|^2 <= 2 |p| ||h|| sqrt(P_tot) - |p|^2`` by Cauchy-Schwarz.
        """
        p = np.abs(self.h_new.conj() @ W[-1])
        hn = np.linalg.norm(self.h_new, axis=1)
        bound = np.min(2.0 * p * hn * np.sqrt(self.spec.p_tot) - p * p)
        return float(min(max(bound, 0.0), self.v_max))

    def gain_scale(self, W):
        """Current smallest new-group gain, used to keep the gain rows O(1)."""
        return max(float(np.min(np.abs(self.h_new.conj() @ W[-1]) ** 2)), 1.0)

    def gain_rows(self, W, scale, v_col=None):
        """Rows ``minorizer(phi(h_u, w_new)) / scale >= level`` per new-group user.

        With ``v_col`` the level is that variable; otherwise it is a zero
        constant for the caller to shift in ``b`` (by ``v / scale``).
        """
        rows = []
        for h in self.h_new:
            p = phi(h, W[-1])
            if p @ p < 1e-24:
                p = phi(h, W[-1] + 1e-6 * h / np.linalg.norm(h))
            lin = taylor_minorizer(p).compose(phi_rows(h, self.G, self.nb))
            width = lin.coef.size if v_col is None else v_col + 1
            A = np.zeros((1, width))
            A[0, :lin.coef.size] = -lin.coef / scale
            if v_col is not None:
                A[0, v_col] = 1.0
            rows.append(Block(A, np.array([lin.const / scale]), cones.NonNeg(1)))
        return rows

    def min_power_program(self, W, scale):
        """``min tau`` s.t. ``||x|| <= tau``, gain rows at level 0, minorized QoS/SIC rows.

        Returns the program, the indices of the gain rows in ``b`` and the
        column of ``tau``.
        """
        pb = ProgramBuilder(self.nb, self.M)
        t = pb.add_var()
        pb.add(power_epigraph(self.nb, self.M, t))
        start = pb.nx + 1
        gain = self.gain_rows(W, scale)
        for blk in gain + self.base.rows(W):
            pb.add(blk)
        c = np.zeros(pb.n)
        c[t] = 1.0
        return pb.build(c), np.arange(start, start + len(gain)), t

    def max_gain_program(self, W, budget, scale):
        """``max u`` s.t. gain rows at level ``u`` (gain ``u * scale``), minorized rows
        and ``||x||^2 <= budget``."""
        pb = ProgramBuilder(self.nb, self.M)
        v = pb.add_var()
        nx = pb.nx
        A = np.zeros((nx + 1, nx + 1))
        A[1:, :nx] = -np.eye(nx)
        b = np.zeros(nx + 1)
        b[0] = np.sqrt(budget)
        pb.add(Block(A, b, cones.SecondOrder(nx + 1)))
        for blk in self.gain_rows(W, scale, v_col=v) + self.base.rows(W):
            pb.add(blk)
        c = np.zeros(pb.n)
        c[v] = -1.0
        return pb.build(c), v

    # -- starting point --------------------------------------------------
    def initial(self):
        """Conservative SOCP with the new group at a modest target level.

        Tries the smallest original threshold (or 1 with no original
        groups), then a hundredth of it, then no target at all.
        """
        base = min(self.spec.thresholds) if self.G else 1.0
        last = None
        for v0 in (base, base / 100.0, 0.0):
            rows = [socp_init_rows(self.h[c.group][c.user], c.target, c.interferers,
                                   c.threshold, 1.0, self.nb) for c in self.base.constraints]
            if v0 > 0:
                rows += [socp_init_rows(h, self.G, (), v0, 1.0, self.nb) for h in self.h_new]
            prob = MMPowerProblem(self.h, self.base.constraints, self.nb, self.M,
                                  budget=self.spec.p_tot)
            sol = cones.solve(prob._program(rows))
            last = sol
            if sol.ok:
                return OK, _within_budget(unembed(sol.x, self.nb, self.M), self.spec.p_tot), sol
        status = INFEASIBLE if last.status is cones.Status.INFEASIBLE else FAILED
        return status, None, last

    def feasible(self, W, slack=1e-6):
        rep = check_constraints(W, self.h, self.base.constraints, 1.0, slack=slack)
        return bool(rep) and float(np.sum(np.abs(W) ** 2)) <= self.spec.p_tot * (1 + 1e-9)


def _within_budget(W, p_tot):
    """``W`` scaled down onto the budget when the solver overshot it by rounding."""
    P = float(np.sum(np.abs(W) ** 2))
    return W * np.sqrt(p_tot / P) if P > p_tot else W


def _violation(prob, W):
    rep = check_constraints(W, prob.h, prob.base.constraints, 1.0, slack=np.inf)
    return max(rep.worst_violation, 0.0)


def _ee_step(prob: _EEProblem, W, spec: EESpec):
    """One surrogate problem around ``W``; returns ``(W_new, r, t, z, solves)``."""
    r_ori = spec.r_ori
    P0 = float(np.sum(np.abs(W) ** 2)) / MW_PER_W
    z0 = (P0 + prob.p_c_w) ** 2
    r0 = float(np.log2(1.0 + np.min(np.abs(prob.h_new.conj() @ W[-1]) ** 2)))
    t0 = max((r_ori + r0) ** 2 / z0, 1e-300)
    _, bt, bz = sqrt_tz_majorizer(t0, z0)
    scale = prob.gain_scale(W)
    prog, idx, tcol = prob.min_power_program(W, scale)
    cache = {}

    def solve_at(r):
        # returns (g(r), h(r), beams); h is non-increasing in r and its last
        # non-negative point is the maximizer of g on the in-budget range:
        # h = min(b_t g'(r), budget margin)
        if r in cache:
            return cache[r]
        v = 2.0 ** r - 1.0
        b = prog.b.copy()
        b[idx] -= v / scale
        sol = cones.solve(cones.ConeProgram(prog.c, prog.A, b, prog.cones))
        if not sol.ok:
            out = (-np.inf, -np.inf, None)
        else:
            tau = sol.x[tcol]
            Pw = tau * tau / MW_PER_W
            margin = (spec.p_tot / MW_PER_W - Pw) / (spec.p_tot / MW_PER_W)
            if margin < -1e-9:
                out = (-np.inf, margin, None)
            else:
                g = (r_ori + r - bz * (Pw + prob.p_c_w) ** 2) / bt
                # d tau / d v from the duals of the gain rows (their b moves by -v/scale)
                dtau = float(np.sum(sol.y[idx])) / scale
                dP = 2.0 * tau * dtau / MW_PER_W * v_slope(r)
                slope = 1.0 - 2.0 * bz * (Pw + prob.p_c_w) * dP
                out = (g, min(slope, max(margin, 0.0)), unembed(sol.x, prob.nb, prob.M))
        cache[r] = out
        return out

    r_hi = float(np.log2(1.0 + prob.surrogate_gain_bound(W)))
    r_start = min(r0, r_hi)
    if spec.search == "golden":
        golden_section_max(lambda r: solve_at(r)[0], 0.0, r_hi, spec.r_tol)
    else:
        h0 = solve_at(r_start)[1]
        step = 0.01 * (1.0 + r_start)
        if h0 >= 0:
            x0 = r_start + min(step, 0.5 * (r_hi - r_start))
            decreasing_root(lambda r: solve_at(r)[1], r_start, r_hi, spec.r_tol, x0=x0, f_lo=h0)
        else:
            x0 = max(r_start - step, 0.5 * r_start)
            decreasing_root(lambda r: solve_at(r)[1], 0.0, r_start, spec.r_tol, x0=x0)
    feasible =[(val[0], r) for r, val in cache.items() if val[2] is not None]
    if not feasible:
        return None, r0, t0, z0, len(cache)
    g, r = max(feasible)
    W_new = cache[r][2]
    P = float(np.sum(np.abs(W_new) ** 2)) / MW_PER_W
    return W_new, r, g, (P + prob.p_c_w) ** 2, len(cache)


def v_slope(r):
    """``d v / d r`` for ``v = 2**r - 1``."""
    return 2.0 ** r * np.log(2.0)


def _best_start(prob, spec, starts):
    cands = []
    for S in starts:
        W = _stack(S)
        if W.shape != (prob.nb, prob.M) or not prob.feasible(W):
            continue
        W = _within_budget(W, spec.p_tot)
        cands.append((ee_value(W, spec), W))
    status, W0, sol = prob.initial()
    if status == OK:
        cands.append((ee_value(W0, spec), W0))
    if not cands:
        return status, None, sol
    return OK, max(cands, key=lambda c: c[0])[1], sol


def solve_ee(spec: EESpec, starts: Sequence = ()) -> EEResult:
    """MM maximization of energy efficiency for the upgraded system.

    The run starts from the best of the conservative SOCP point and any
    feasible beam sets in ``starts``; the EE trace never decreases.
    """
    prob = _EEProblem(spec)
    status, W, sol = _best_start(prob, spec, starts)
    trace = MMTrace()
    if status != OK:
        trace.status = status
        return EEResult(status, None, -np.inf, trace)
    ee = ee_value(W, spec)
    trace.record(ee, _violation(prob, W), sol.iterations if sol is not None else 0)
    r = t = z = 0.0
    for _ in range(spec.max_mm_iters):
        W_new, r, t, z, nsolves = _ee_step(prob, W, spec)
        if W_new is None:
            trace.status = FAILED
            break
        W_new = _within_budget(W_new, spec.p_tot)
        ee_new = ee_value(W_new, spec)
        trace.record(ee_new, _violation(prob, W_new), nsolves)
        change = abs(ee_new - ee) / max(abs(ee), 1e-300)
        W, ee = W_new, ee_new
        if change < spec.mm_tol:
            trace.converged = True
            break
    beams = BeamformerSet.from_stacked(W, with_new=True)
    trace.final_beams = beams
    rate_new = float(np.log2(1.0 + new_group_sinr(W, spec)))
    status = OK if trace.status == OK else FAILED
    return EEResult(status, beams, ee, trace, rate_new, r, t, z, spec.r_ori)


@dataclass
class SEMaxResult:
    status: str
    beams: Optional[BeamformerSet]
    sum_rate: float
    ee: float
    trace: MMTrace = field(default_factory=MMTrace)

    @property
    def ok(self):
        return self.status == OK


def solve_se_max(spec: EESpec) -> SEMaxResult:
    """Largest sum rate with the whole budget available.

    ``R_ori`` is fixed, so this maximizes the smallest new-group SINR
    (max-min epigraph with minorized gain rows) under every QoS/SIC row
    and ``sum ||w||^2 <= P_tot``.  The trace records the new-group SINR.
    """
    prob = _EEProblem(spec)
    status, W, sol = prob.initial()
    trace = MMTrace()
    if status != OK:
        trace.status = status
        return SEMaxResult(status, None, -np.inf, -np.inf, trace)
    v = new_group_sinr(W, spec)
    trace.record(v, _violation(prob, W), sol.iterations)
    for _ in range(spec.max_mm_iters):
        prog, vcol = prob.max_gain_program(W, spec.p_tot, prob.gain_scale(W))
        sol = cones.solve(prog)
        if not sol.ok:
            trace.status = FAILED
            break
        W_new = _within_budget(unembed(sol.x, prob.nb, prob.M), spec.p_tot)
        v_new = new_group_sinr(W_new, spec)
        trace.record(v_new, _violation(prob, W_new), sol.iterations)
        change = abs(np.log2(1 + v_new) - np.log2(1 + v)) / max(np.log2(1 + v), 1e-300)
        W, v = W_new, v_new
        if change < spec.mm_tol:
            trace.converged = True
            break
    beams = BeamformerSet.from_stacked(W, with_new=True)
    trace.final_beams = beams
    status = OK if trace.status == OK else FAILED
    return SEMaxResult(status, beams, spec.r_ori + float(np.log2(1.0 + v)), ee_value(W, spec),
                       trace)

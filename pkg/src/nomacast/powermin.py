"""Transmit-power minimization under QoS and SIC constraints.

The non-convex SINR constraints are replaced by inner convex
approximations (tangent-plane minorizers of ``|h^H w|^2``) around the
previous iterate, and the resulting SOCP is solved repeatedly.  The first
point comes from a conservative SOCP that forces every useful channel
gain onto the positive real axis.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cones
from .channel import BeamformerSet, ChannelRealization, check_constraints, noma_constraints
from .modeling import (MMTrace, ProgramBuilder, constraint_block, embed, phi, power_epigraph,
                       socp_init_rows, unembed)

OK = "ok"
INFEASIBLE = "infeasible"          # the conservative starting SOCP is infeasible
INFEASIBLE_BUDGET = "over_budget"  # feasible, but not within the power budget
FAILED = "failed"


@dataclass(frozen=True)
class PowerMinSpec:
    realization: ChannelRealization
    thresholds: tuple
    mm_tol: float = 1e-4
    max_mm_iters: int = 50

    def __post_init__(self):
        thr = tuple(float(t) for t in self.thresholds)
        object.__setattr__(self, "thresholds", thr)
        if len(thr) != self.realization.groups:
            raise ValueError(f"need {self.realization.groups} thresholds, got {len(thr)}")
        if any(not t > 0 for t in thr):
            raise ValueError("thresholds must be positive")

    @classmethod
    def from_rates(cls, realization, rates, **kw):
        """Thresholds ``2**R - 1`` from per-group rates in bits/s/Hz."""
        rates = np.broadcast_to(np.asarray(rates, dtype=float), (realization.groups,))
        return cls(realization, tuple(2.0 ** rates - 1.0), **kw)


@dataclass
class PowerMinResult:
    status: str
    beams: Optional[BeamformerSet]
    power: float
    trace: MMTrace = field(default_factory=MMTrace)
    solver_status: Optional[str] = None

    @property
    def ok(self):
        return self.status == OK


def _violation(W, h_groups, constraints):
    rep = check_constraints(W, h_groups, constraints, 1.0, slack=np.inf)
    return max(rep.worst_violation, 0.0)


class MMPowerProblem:
    """MM power minimization over an arbitrary list of SINR constraints.

    ``h_groups`` must already be divided by the noise amplitude, so the
    noise power inside every constraint is 1.
    """

    def __init__(self, h_groups, constraints, nbeams, M, budget=None,
                 mm_tol=1e-4, max_iters=50):
        self.h = h_groups
        self.constraints = list(constraints)
        self.nbeams = nbeams
        self.M = M
        self.budget = budget
        self.mm_tol = mm_tol
        self.max_iters = max_iters

    def _program(self, rows):
        pb = ProgramBuilder(self.nbeams, self.M)
        t = pb.add_var()
        pb.add(power_epigraph(self.nbeams, self.M, t))
        for blk in rows:
            pb.add(blk)
        if self.budget is not None:
            coef = np.zeros(pb.n)
            coef[t] = -1.0
            pb.linear(coef, np.sqrt(self.budget))
        c = np.zeros(pb.n)
        c[t] = 1.0
        return pb.build(c)

    def initial(self):
        """Solve the conservative SOCP; returns ``(status, W, cone solution)``."""
        rows = [socp_init_rows(self.h[c.group][c.user], c.target, c.interferers, c.threshold,
                               1.0, self.nbeams) for c in self.constraints]
        sol = cones.solve(self._program(rows))
        if sol.status is cones.Status.INFEASIBLE:
            return INFEASIBLE, None, sol
        if not sol.ok:
            return FAILED, None, sol
        return OK, unembed(sol.x, self.nbeams, self.M), sol

    def points(self, W):
        pts = []
        for c in self.constraints:
            h = self.h[c.group][c.user]
            p = phi(h, W[c.target])
            if p @ p < 1e-24:
                # a beam orthogonal to this channel makes the tangent plane
                # useless; move the expansion point slightly towards h
                p = phi(h, W[c.target] + 1e-6 * h / np.linalg.norm(h))
            pts.append(p)
        return pts

    def rows(self, W):
        """Minorized blocks of every constraint around the beams ``W``."""
        return [constraint_block(self.h, c, 1.0, p, self.nbeams)
                for c, p in zip(self.constraints, self.points(W))]

    def step(self, W):
        return cones.solve(self._program(self.rows(W)))

    def run(self, W0=None, stop_below=None):
        """MM iterations from ``W0`` (or the conservative SOCP point).

        ``stop_below`` ends the run as soon as the power drops below that
        level; iterates never increase, so the verdict "below" is final.
        """
        trace = MMTrace()
        if W0 is None:
            status, W, sol = self.initial()
            if status != OK:
                trace.status = status
                return PowerMinResult(status, None, np.inf, trace, sol.status.value)
            iters0 = sol.iterations
        else:
            W, iters0 = np.atleast_2d(W0), 0
        P = float(np.sum(np.abs(W) ** 2))
        trace.record(P, _violation(W, self.h, self.constraints), iters0)
        status = OK
        for _ in range(self.max_iters):
            if stop_below is not None and P < stop_below:
                break
            sol = self.step(W)
            if not sol.ok:
                status = FAILED
                break
            W_new = unembed(sol.x, self.nbeams, self.M)
            P_new = float(np.sum(np.abs(W_new) ** 2))
            trace.record(P_new, _violation(W_new, self.h, self.constraints), sol.iterations)
            change = abs(P - P_new) / max(P, 1e-300)
            W, P = W_new, P_new
            if change < self.mm_tol:
                trace.converged = True
                break
        beams = BeamformerSet(W)
        trace.final_beams = beams
        trace.status = status
        if status != OK:
            return PowerMinResult(FAILED, beams, P, trace, sol.status.value)
        return PowerMinResult(OK, beams, P, trace)


def _noma_problem(spec: PowerMinSpec, budget=None):
    rz = spec.realization
    cons = noma_constraints(rz.geometry.users_per_region, spec.thresholds)
    return MMPowerProblem(rz.normalized(), cons, rz.groups, rz.geometry.antennas,
                          budget=budget, mm_tol=spec.mm_tol, max_iters=spec.max_mm_iters)


def socp_initial(spec: PowerMinSpec) -> PowerMinResult:
    """Beams from the conservative SOCP (feasible for the original problem)."""
    prob = _noma_problem(spec)
    status, W, sol = prob.initial()
    trace = MMTrace()
    if status != OK:
        trace.status = status
        return PowerMinResult(status, None, np.inf, trace, sol.status.value)
    P = float(np.sum(np.abs(W) ** 2))
    trace.record(P, _violation(W, prob.h, prob.constraints), sol.iterations)
    trace.final_beams = BeamformerSet(W)
    return PowerMinResult(OK, trace.final_beams, P, trace)


def solve_power_min(spec: PowerMinSpec, stop_below=None) -> PowerMinResult:
    """Minimum total power meeting every QoS and SIC constraint (MM solution)."""
    return _noma_problem(spec).run(stop_below=stop_below)


def worst_case_complexity_estimate(G, U):
    """Constraint counts of one convex subproblem and its IPM iteration scaling.

    With ``U`` users per group there are ``U G`` QoS rows and
    ``U G (G - 1) / 2`` SIC rows; the iteration count of a path-following
    method grows like the square root of the number of cone blocks, i.e.
    ``O(sqrt(U G^2))``.
    """
    qos = U * G
    sic = U * G * (G - 1) // 2
    return {"qos": qos, "sic": sic, "blocks": qos + sic, "label": "O(sqrt(U*G^2))",
            "sqrt_blocks": float(np.sqrt(qos + sic))}

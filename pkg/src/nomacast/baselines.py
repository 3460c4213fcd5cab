"""SDMA and OMA benchmark schemes, plus NOMA wrappers with the same record type.

SDMA serves every group at once and treats all other groups' beams as
noise (no SIC).  OMA gives each group its own equal time slot: to deliver
rate ``R`` over a ``1/S`` fraction of the time the in-slot rate is ``S R``,
and transmit power is averaged over the slots.  For sum rate and EE the
full budget ``P_tot`` is available inside every slot.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .channel import ChannelRealization, noma_constraints, sdma_constraints
from .ee import MW_PER_W, EESpec, solve_ee, solve_se_max
from .powermin import (FAILED, INFEASIBLE, OK, MMPowerProblem, PowerMinResult, PowerMinSpec,
                       solve_power_min)
from .sumrate import FairPolicy, SumRateResult, _finish, k_upper_bound, solve_sum_rate


class SchemeTag(str, Enum):
    NOMA = "NOMA"
    SDMA = "SDMA"
    OMA = "OMA"


@dataclass
class SchemeResult:
    """Objective of one scheme on one instance.

    ``objective`` is in mW (power minimization, time-averaged for OMA),
    bits/s/Hz (sum rate) or bits/Joule/Hz (EE).  ``detail`` keeps the
    underlying result object(s) for inspection.
    """
    scheme: SchemeTag
    status: str
    objective: float
    mm_iterations: int = 0
    detail: object = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == OK


def _worst(statuses):
    for s in (FAILED, INFEASIBLE):
        if s in statuses:
            return s
    return OK


# -- power minimization ---------------------------------------------------

def solve_power_min_noma(spec: PowerMinSpec) -> SchemeResult:
    res = solve_power_min(spec)
    return SchemeResult(SchemeTag.NOMA, res.status, res.power, res.trace.mm_iterations, res)


def _sdma_problem(realization, thresholds, mm_tol, max_iters, budget=None):
    cons = sdma_constraints(realization.geometry.users_per_region, thresholds)
    return MMPowerProblem(realization.normalized(), cons, realization.groups,
                          realization.geometry.antennas, budget=budget, mm_tol=mm_tol,
                          max_iters=max_iters)


def solve_power_min_sdma(spec: PowerMinSpec, stop_below=None) -> SchemeResult:
    """Power-min MM with no SIC rows and interference from all other beams."""
    prob = _sdma_problem(spec.realization, spec.thresholds, spec.mm_tol, spec.max_mm_iters)
    res = prob.run(stop_below=stop_below)
    return SchemeResult(SchemeTag.SDMA, res.status, res.power, res.trace.mm_iterations, res)


def oma_slot_threshold(threshold, slots):
    """In-slot SINR delivering ``log2(1 + threshold)`` on average over ``slots`` slots."""
    return float((1.0 + threshold) ** slots - 1.0)


def _slot_power(realization, g, threshold, mm_tol, max_iters, stop_below=None) -> PowerMinResult:
    spec = PowerMinSpec(realization.subset([g]), (threshold,), mm_tol=mm_tol,
                        max_mm_iters=max_iters)
    return solve_power_min(spec, stop_below=stop_below)


def solve_power_min_oma(spec: PowerMinSpec) -> SchemeResult:
    """One single-group multicast problem per slot; reports the time-averaged power."""
    rz = spec.realization
    G = rz.groups
    slots = [_slot_power(rz, g, oma_slot_threshold(t, G), spec.mm_tol, spec.max_mm_iters)
             for g, t in enumerate(spec.thresholds)]
    status = _worst([r.status for r in slots])
    power = float(np.mean([r.power for r in slots])) if status == OK else np.inf
    iters = sum(r.trace.mm_iterations for r in slots)
    return SchemeResult(SchemeTag.OMA, status, power, iters, slots,
                        {"slot_powers": [r.power for r in slots]})


# -- fair sum rate --------------------------------------------------------

def _sum_rate_record(scheme, res: SumRateResult):
    iters = sum(step.mm_iterations for step in res.trace)
    return SchemeResult(scheme, res.status, res.sum_rate, iters, res, {"k_opt": res.k_opt})


def solve_sum_rate_noma(realization: ChannelRealization, policy: FairPolicy) -> SchemeResult:
    return _sum_rate_record(SchemeTag.NOMA, solve_sum_rate(realization, policy))


def solve_sum_rate_sdma(realization: ChannelRealization, policy: FairPolicy) -> SchemeResult:
    """Fair sum-rate bisection with the SDMA power oracle."""
    if len(policy.grades) != realization.groups:
        raise ValueError("need one grade per group")

    def power_at(k, budget):
        prob = _sdma_problem(realization, policy.thresholds(k), policy.mm_tol,
                             policy.max_mm_iters)
        res = prob.run(stop_below=budget)
        if res.status != OK:
            return np.inf, None, res.trace.mm_iterations
        return res.power, res.beams, res.trace.mm_iterations

    res = _finish(power_at, k_upper_bound(realization, policy), policy)
    return _sum_rate_record(SchemeTag.SDMA, res)


def solve_sum_rate_oma(realization: ChannelRealization, policy: FairPolicy) -> SchemeResult:
    """Bisection on ``k`` with slot thresholds ``2**(G k r_g) - 1``.

    A ``k`` is feasible when every slot fits the full budget; the reported
    power of a step is the largest slot power.
    """
    G = realization.groups
    if len(policy.grades) != G:
        raise ValueError("need one grade per group")

    def power_at(k, budget):
        worst, beams, iters = 0.0, [], 0
        for g, r in enumerate(policy.grades):
            res = _slot_power(realization, g, 2.0 ** (G * k * r) - 1.0, policy.mm_tol,
                              policy.max_mm_iters, stop_below=budget)
            iters += res.trace.mm_iterations
            if res.status != OK:
                return np.inf, None, iters
            worst = max(worst, res.power)
            beams.append(res.beams)
            if worst >= budget:
                break
        return worst, beams, iters

    res = _finish(power_at, k_upper_bound(realization, policy, slots=G), policy)
    return _sum_rate_record(SchemeTag.OMA, res)


# -- energy efficiency ----------------------------------------------------

def solve_ee_noma(spec: EESpec, starts=()) -> SchemeResult:
    res = solve_ee(spec, starts)
    return SchemeResult(SchemeTag.NOMA, res.status, res.ee, res.trace.mm_iterations, res)


@dataclass
class OMAEEResult:
    status: str
    ee: float
    slot_powers: list          # mW, original groups' slots
    new_power: float           # mW in the new group's slot
    rate_new: float            # time-averaged new-group rate
    gain_per_mw: float         # new-group SNR per mW of slot power


def solve_ee_oma(spec: EESpec) -> SchemeResult:
    """EE with ``G + 1`` equal slots, one per original group and one for the new group.

    Original slots run at the minimum power for in-slot threshold
    ``(1 + Gamma_g)**(G+1) - 1`` (each must fit ``P_tot``).  In the new slot
    the best multicast SNR is linear in the slot power ``p`` (single group,
    no interference), ``c p`` with ``c`` from a full-budget max-min solve, and
    ``p`` is chosen to maximize

        (R_ori + log2(1 + c p) / (G+1)) / ((sum P_g + p) / (G+1) + P_c).
    """
    rz = spec.realization
    G = spec.original_groups
    S = G + 1
    slots, iters = [], 0
    for g, t in enumerate(spec.thresholds):
        res = _slot_power(rz, g, oma_slot_threshold(t, S), spec.mm_tol, spec.max_mm_iters)
        iters += res.trace.mm_iterations
        if res.status != OK:
            return SchemeResult(SchemeTag.OMA, res.status, -np.inf, iters, None)
        if res.power > spec.p_tot:
            return SchemeResult(SchemeTag.OMA, INFEASIBLE, -np.inf, iters, None)
        slots.append(res.power)
    new = EESpec(rz.subset([G]), (), spec.p_c, spec.p_tot, mm_tol=spec.mm_tol,
                 max_mm_iters=spec.max_mm_iters)
    se = solve_se_max(new)
    iters += se.trace.mm_iterations
    if not se.ok:
        return SchemeResult(SchemeTag.OMA, se.status, -np.inf, iters, None)
    c = float(se.trace.objectives[-1]) / spec.p_tot
    p_orig = float(np.sum(slots))
    r_ori = spec.r_ori
    p_c = spec.p_c / MW_PER_W

    def ee(p):
        return (r_ori + np.log2(1.0 + c * p) / S) / ((p_orig + p) / S / MW_PER_W + p_c)

    opt = minimize_scalar(lambda p: -ee(p), bounds=(0.0, spec.p_tot), method="bounded",
                          options={"xatol": 1e-6 * spec.p_tot})
    # the bounded search never probes the end points themselves
    p = max([(ee(x), x) for x in (0.0, float(opt.x), spec.p_tot)])[1]
    out = OMAEEResult(OK, float(ee(p)), slots, p, float(np.log2(1.0 + c * p) / S), c)
    return SchemeResult(SchemeTag.OMA, OK, out.ee, iters, out)

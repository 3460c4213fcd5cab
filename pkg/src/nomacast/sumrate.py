"""Fair sum-rate maximization by bisection on the common rate scale ``k``.

Group ``g`` is served at ``k * r_g`` bits/s/Hz, so the rate ratios are the
grade ratios for every ``k``.  A value of ``k`` is accepted when the MM
power minimization at thresholds ``2**(k r_g) - 1`` needs less than the
budget; the bracket ``[L, U]`` is halved until ``U - L <= epsilon_k``.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .channel import BeamformerSet, ChannelRealization
from .powermin import OK, PowerMinSpec, solve_power_min


@dataclass(frozen=True)
class FairPolicy:
    grades: tuple
    p_tot: float               # mW
    epsilon_k: float = 1e-3
    mm_tol: float = 1e-4
    max_mm_iters: int = 50

    def __post_init__(self):
        object.__setattr__(self, "grades", tuple(float(r) for r in self.grades))
        if any(not r > 0 for r in self.grades):
            raise ValueError("grades must be positive")
        if self.p_tot < 0:
            raise ValueError("p_tot must be non-negative")
        if not self.epsilon_k > 0:
            raise ValueError("epsilon_k must be positive")

    def thresholds(self, k):
        return tuple(2.0 ** (k * np.asarray(self.grades)) - 1.0)


@dataclass
class BisectionStep:
    k: float
    power: float        # MM power at k (inf when the start SOCP is infeasible)
    feasible: bool
    lower: float        # bracket after this step
    upper: float
    mm_iterations: int


@dataclass
class SumRateResult:
    k_opt: float
    sum_rate: float
    beams: Optional[BeamformerSet]
    trace: list = field(default_factory=list)
    k_mid: float = 0.0   # midpoint of the final bracket
    status: str = OK
    power: float = 0.0   # MM power of the returned beams
    grades: tuple = ()

    @property
    def rates(self):
        """Per-group rates ``k_opt * r_g`` in bits/s/Hz."""
        return self.k_opt * np.asarray(self.grades)


def k_upper_bound(realization: ChannelRealization, policy: FairPolicy, slots=1):
    """Largest ``k`` any single user could reach with the whole budget.

    ``min_g log2(1 + min_u ||h_ug||^2 P / noise) / (slots * r_g)``; ``slots``
    divides the rate for time-shared schemes.
    """
    if len(policy.grades) != realization.groups:
        raise ValueError("need one grade per group")
    noise = realization.noise_power
    out = np.inf
    for hg, r in zip(realization.h, policy.grades):
        gain = np.min(np.sum(np.abs(hg) ** 2, axis=1))
        out = min(out, np.log2(1.0 + gain * policy.p_tot / noise) / (slots * r))
    return float(out)


def bisect_k(power_at: Callable, upper: float, policy: FairPolicy):
    """Generic bisection; ``power_at(k, stop_below)`` returns ``(power, beams, iters)``.

    Returns ``(L, U, best_beams, best_power, trace)`` where ``L`` is the
    largest ``k`` certified feasible (power strictly below the budget).
    """
    L, U = 0.0, float(upper)
    best, best_power = None, 0.0
    trace = []
    while U - L > policy.epsilon_k:
        k = 0.5 * (L + U)
        power, beams, iters = power_at(k, policy.p_tot)
        feasible = power < policy.p_tot
        if feasible:
            L = k
            best, best_power = beams, power
        else:
            U = k
        trace.append(BisectionStep(k, power, feasible, L, U, iters))
    return L, U, best, best_power, trace


def solve_sum_rate(realization: ChannelRealization, policy: FairPolicy) -> SumRateResult:
    """Fair sum rate ``k_opt * sum(r_g)`` with NOMA beams from the MM solver.

    ``k_opt`` is the feasible end of the final bracket, so the returned beams
    always fit the budget.  MM stops early once its (non-increasing) power
    falls below the budget, which settles the feasibility verdict.
    """
    if len(policy.grades) != realization.groups:
        raise ValueError("need one grade per group")

    def power_at(k, budget):
        spec = PowerMinSpec(realization, policy.thresholds(k), mm_tol=policy.mm_tol,
                            max_mm_iters=policy.max_mm_iters)
        res = solve_power_min(spec, stop_below=budget)
        if res.status != OK:
            return np.inf, None, res.trace.mm_iterations
        return res.power, res.beams, res.trace.mm_iterations

    return _finish(power_at, k_upper_bound(realization, policy), policy)


def _finish(power_at, upper, policy, scale=1.0):
    if policy.p_tot <= 0 or upper <= 0:
        return SumRateResult(0.0, 0.0, None, [], 0.0, OK, 0.0, policy.grades)
    L, U, beams, power, trace = bisect_k(power_at, upper, policy)
    k = L if beams is not None else 0.0
    return SumRateResult(k, scale * k * sum(policy.grades), beams, trace, 0.5 * (L + U),
                         OK, power, policy.grades)

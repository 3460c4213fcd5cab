"""Monte-Carlo execution of a :class:`ScenarioConfig`.

One trial is one channel seed; it covers every sweep point and scheme so
that all curves share their random numbers.  Trials run in a process pool
and are merged in trial order, so the output never depends on ``jobs``.
"""
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .. import baselines as bl
from ..channel import dbm_to_mw, preset_geometry, sample_channels
from ..ee import MW_PER_W, EESpec, solve_ee, solve_se_max
from ..powermin import INFEASIBLE, INFEASIBLE_BUDGET, OK, PowerMinSpec
from ..sdr import sdr_lower_bound
from ..sumrate import FairPolicy
from .config import GCASE_MODELS, ScenarioConfig

STATUSES = ("ok", "infeasible", "failed")


@dataclass
class TrialRecord:
    """One (trial, sweep point, scheme) outcome.

    ``objective`` is mW (PowerMin), bits/s/Hz (SumRate) or bits/Joule/Hz
    (EE, and the EE scheme of Convergence).
    """
    trial: int
    seed: int
    series: Optional[float]
    sweep: float
    scheme: str
    status: str
    objective: float
    mm_iterations: int
    converged: bool
    wall_time: float = 0.0


def trial_seeds(base_seed, trials):
    """Independent per-trial channel seeds derived from the base seed."""
    children = np.random.SeedSequence(int(base_seed)).spawn(int(trials))
    return [int(c.generate_state(1)[0]) for c in children]


def _status(s):
    if s == OK:
        return "ok"
    if s in (INFEASIBLE, INFEASIBLE_BUDGET):
        return "infeasible"
    return "failed"


def point_params(cfg: ScenarioConfig, series, value):
    """Scenario parameters at one sweep point, after applying series and sweep values."""
    p = dict(model=cfg.model, delta_d=cfg.delta_d, antennas=cfg.antennas, users=cfg.users,
             rate=cfg.rate, p_tot_dbm=cfg.p_tot_dbm)
    for var, v in ((cfg.series_variable, series), (cfg.sweep_variable, value)):
        if var is None or var == "trial":
            continue
        if var == "gcase":
            p["model"] = GCASE_MODELS[int(v)]
        else:
            p[var] = v
    if p["model"].upper() != "D":
        p["delta_d"] = None
    return p


def _geometry(cfg, p):
    return preset_geometry(p["model"], p["delta_d"], antennas=int(p["antennas"]),
                           users=int(p["users"]), pathloss_exponent=cfg.pathloss_exponent,
                           noise_power=dbm_to_mw(cfg.noise_dbm))


def _power_min(cfg, rz, p, scheme):
    spec = PowerMinSpec.from_rates(rz, p["rate"], mm_tol=cfg.mm_tol,
                                   max_mm_iters=cfg.max_mm_iters)
    if scheme == "SDR":
        res = sdr_lower_bound(spec)
        return _status(res.status), res.bound, 0, True, res
    fn = {"NOMA": bl.solve_power_min_noma, "SDMA": bl.solve_power_min_sdma,
          "OMA": bl.solve_power_min_oma}[scheme]
    res = fn(spec)
    conv = res.detail.trace.converged if scheme != "OMA" else all(
        r.trace.converged for r in res.detail)
    return _status(res.status), res.objective, res.mm_iterations, bool(conv), res.detail


def _sum_rate(cfg, rz, p, scheme):
    grades = cfg.grades or (1.0,) * rz.groups
    policy = FairPolicy(grades, dbm_to_mw(p["p_tot_dbm"]), epsilon_k=cfg.epsilon_k,
                        mm_tol=cfg.mm_tol, max_mm_iters=cfg.max_mm_iters)
    fn = {"NOMA": bl.solve_sum_rate_noma, "SDMA": bl.solve_sum_rate_sdma,
          "OMA": bl.solve_sum_rate_oma}[scheme]
    res = fn(rz, policy)
    return _status(res.status), res.objective, res.mm_iterations, True, res.detail


def _ee_spec(cfg, rz, p):
    return EESpec.from_rates(rz, cfg.rate_pri, p_c=cfg.p_c_w * MW_PER_W,
                             p_tot=dbm_to_mw(p["p_tot_dbm"]), mm_tol=cfg.mm_tol,
                             max_mm_iters=cfg.max_mm_iters)


_FAILED = ("failed", float("nan"), 0, False, None)


def _timed(fn, *args):
    out, dt = _guarded(fn, *args)
    return (_FAILED if out is None else out), dt


def run_trial(cfg: ScenarioConfig, trial: int, seed: int, observer=None) -> List[TrialRecord]:
    """All sweep points and schemes of one trial; failures become rows.

    ``observer(record, detail, context)`` is called after every row with the
    full result object behind it (MM traces, bisection steps, matrices) and
    a context dict holding the realization and point parameters.
    """
    rows = []
    context = {}

    def add(series, value, scheme, out, dt):
        status, obj, iters, conv, detail = out
        rec = TrialRecord(trial, seed, series, value, scheme, status, float(obj), int(iters),
                          bool(conv), dt)
        rows.append(rec)
        if observer is not None:
            observer(rec, detail, dict(context))

    prev_beams = None   # EEmax beams at the previous budget of this trial
    for series, value in cfg.points():
        p = point_params(cfg, series, value)
        context.clear()
        context.update(config=cfg, params=p)
        if cfg.kind == "Convergence":
            _convergence(cfg, p, seed, context, lambda *a: add(series, value, *a))
            continue
        rz = sample_channels(_geometry(cfg, p), seed)
        context["realization"] = rz
        if cfg.kind == "EE":
            prev_beams = _ee_point(cfg, rz, p, prev_beams, context,
                                    lambda *a: add(series, value, *a))
            continue
        fn = _power_min if cfg.kind == "PowerMin" else _sum_rate
        for scheme in cfg.schemes:
            out, dt = _timed(fn, cfg, rz, p, scheme)
            add(series, value, scheme, out, dt)
    return rows


def _guarded(fn, *args):
    t0 = time.perf_counter()
    try:
        out = fn(*args)
    except Exception:   # a failing scheme becomes a row, never aborts the sweep
        out = None
    return out, time.perf_counter() - t0


def _ee_point(cfg, rz, p, prev_beams, context, add):
    """EE schemes at one point; returns the EEmax beams for the next budget."""
    spec = _ee_spec(cfg, rz, p)
    context["spec"] = spec
    se, se_dt = _guarded(solve_se_max, spec)
    keep = None
    for scheme in cfg.schemes:
        if scheme == "SEmax":
            out = _FAILED if se is None else (_status(se.status), se.ee,
                                             se.trace.mm_iterations, se.trace.converged, se)
            add(scheme, out, se_dt)
        elif scheme == "EEmax":
            starts = [b for b in (se.beams if se is not None and se.ok else None, prev_beams)
                      if b is not None]
            res, dt = _guarded(solve_ee, spec, starts)
            out = _FAILED if res is None else (_status(res.status), res.ee,
                                              res.trace.mm_iterations, res.trace.converged, res)
            add(scheme, out, dt)
            # the next (larger) budget of a sorted p_tot sweep can start here
            if res is not None and res.ok and cfg.sweep_variable == "p_tot_dbm":
                keep = res.beams
        else:
            out, dt = _timed(_ee_oma, spec)
            add(scheme, out, dt)
    return keep


def _ee_oma(spec):
    res = bl.solve_ee_oma(spec)
    return _status(res.status), res.objective, res.mm_iterations, True, res.detail


def _convergence(cfg, p, seed, context, add):
    if "Alg1" in cfg.schemes:
        rz = sample_channels(_geometry(cfg, p), seed)
        context["realization"] = rz
        out, dt = _timed(_power_min, cfg, rz, p, "NOMA")
        add("Alg1", out, dt)
    if "Alg3" in cfg.schemes:
        q = dict(p, model=cfg.ee_model, delta_d=None, antennas=cfg.ee_antennas,
                 users=cfg.ee_users)
        rz = sample_channels(_geometry(cfg, q), seed)
        spec = _ee_spec(cfg, rz, q)
        context.update(realization=rz, spec=spec)

        def alg3():
            res = solve_ee(spec)
            return (_status(res.status), res.ee, res.trace.mm_iterations, res.trace.converged,
                    res)
        out, dt = _timed(alg3)
        add("Alg3", out, dt)


def _trial_job(args):
    return run_trial(*args)


def run_trials(cfg: ScenarioConfig, jobs=1, observer=None) -> List[TrialRecord]:
    """Every trial of ``cfg``, rows ordered by trial then point then scheme.

    An ``observer`` (see :func:`run_trial`) forces in-process execution.
    """
    seeds = trial_seeds(cfg.seed, cfg.trials)
    work = [(cfg, t, s) for t, s in enumerate(seeds)]
    if observer is not None or jobs is None or jobs <= 1:
        chunks = [run_trial(c, t, s, observer) for c, t, s in work]
    else:
        with ProcessPoolExecutor(max_workers=int(jobs)) as pool:
            # map keeps submission order, so the merge is in trial order
            chunks = list(pool.map(_trial_job, work))
    return [row for chunk in chunks for row in chunk]

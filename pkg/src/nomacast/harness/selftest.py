"""Fast end-to-end checks against closed forms (the ``selftest`` subcommand)."""
import numpy as np

from .. import cones
from ..channel import (ChannelRealization, ScenarioGeometry, RegionSpec, check_feasible,
                       dbm_to_mw, mw_to_dbm, preset_geometry, sample_channels)
from ..powermin import PowerMinSpec, solve_power_min
from ..sdr import sdr_lower_bound


def _single_user(seed):
    geo = ScenarioGeometry((RegionSpec(10.0, 20.0),), (1,), 4, 2.5, 1e-8)
    return sample_channels(geo, seed)


def _checks():
    # dBm conversion round trip
    yield "dBm round trip", abs(mw_to_dbm(dbm_to_mw(27.5)) - 27.5) < 1e-12
    # a tiny SOCP with known optimum: min x s.t. ||(1, 1)|| <= x  ->  sqrt(2)
    prog = cones.ConeProgram(np.array([1.0]), np.array([[-1.0], [0.0], [0.0]]),
                             np.array([0.0, 1.0, 1.0]), [cones.SecondOrder(3)])
    sol = cones.solve(prog)
    yield "cone solver", sol.ok and abs(sol.pcost - np.sqrt(2.0)) < 1e-7
    # single user: the matched filter is optimal, power = gamma sigma^2 / ||h||^2
    rz = _single_user(3)
    spec = PowerMinSpec(rz, (3.0,))
    res = solve_power_min(spec)
    exact = 3.0 * rz.noise_power / float(np.sum(np.abs(rz.h[0]) ** 2))
    yield "single-user power", res.ok and abs(res.power / exact - 1.0) < 1e-6
    # the relaxation bounds the MM power from below on a three-group instance
    rz = sample_channels(preset_geometry("A", antennas=4, users=2), 5)
    spec = PowerMinSpec.from_rates(rz, 1.0)
    mm = solve_power_min(spec)
    bound = sdr_lower_bound(spec)
    yield "relaxation bound", mm.ok and bound.ok and bound.bound <= mm.power * (1 + 1e-6)
    yield "MM beams feasible", mm.ok and bool(
        check_feasible(mm.beams.stacked(), rz, spec.thresholds, slack=1e-6))


def run_selftest(out=print):
    ok = True
    for name, passed in _checks():
        out(f"{'PASS' if passed else 'FAIL'} {name}")
        ok &= bool(passed)
    return ok

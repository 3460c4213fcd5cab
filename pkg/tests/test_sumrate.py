import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nomacast.channel import (ChannelRealization, RegionSpec, ScenarioGeometry, preset_geometry,
                              sample_channels)
from nomacast.powermin import PowerMinSpec, solve_power_min
from nomacast.sumrate import FairPolicy, bisect_k, k_upper_bound, solve_sum_rate


def fixed_user(gain, M=1, noise=1e-8):
    geo = ScenarioGeometry((RegionSpec(10, 10),), (1,), M, 2.0, noise)
    h = np.zeros((1, M), complex)
    h[0, 0] = np.sqrt(gain)
    return ChannelRealization(geo, (h,), ([10.0],))


def test_policy_validation():
    with pytest.raises(ValueError):
        FairPolicy((1.0, 0.0), 10.0)
    with pytest.raises(ValueError):
        FairPolicy((1.0,), -1.0)
    with pytest.raises(ValueError):
        FairPolicy((1.0,), 1.0, epsilon_k=0.0)
    pol = FairPolicy((1.0, 2.0), 10.0)
    assert pol.epsilon_k == 1e-3
    assert pol.thresholds(1.5) == pytest.approx((2 ** 1.5 - 1, 2 ** 3 - 1))


def test_k_upper_bound_examples():
    rz = fixed_user(1e-4)
    assert k_upper_bound(rz, FairPolicy((1.0,), 1000.0)) == pytest.approx(23.2535, abs=1e-4)
    assert k_upper_bound(rz, FairPolicy((1.0,), 1e-12)) < 1e-3
    assert k_upper_bound(rz, FairPolicy((1.0,), 0.0)) == 0.0
    geo = ScenarioGeometry((RegionSpec(10, 10), RegionSpec(10, 10)), (1, 1), 1, 2.0, 1e-8)
    h = np.array([[1e-2]], complex)
    rz2 = ChannelRealization(geo, (h, h), ([10.0], [10.0]))
    one = k_upper_bound(rz2, FairPolicy((1.0, 1.0), 1000.0))
    assert k_upper_bound(rz2, FairPolicy((1.0, 2.0), 1000.0)) == pytest.approx(one / 2)


@given(st.floats(1e-6, 1e-3), st.floats(1.0, 1e4), st.floats(0.5, 3.0))
@settings(max_examples=10)
def test_single_user_closed_form(gain, p_tot, r):
    rz = fixed_user(gain)
    pol = FairPolicy((r,), p_tot)
    res = solve_sum_rate(rz, pol)
    exact = np.log2(1 + p_tot * gain / rz.noise_power) / r
    assert exact - pol.epsilon_k <= res.k_opt <= exact
    assert res.sum_rate == pytest.approx(res.k_opt * r)


def test_zero_budget():
    res = solve_sum_rate(fixed_user(1e-4), FairPolicy((1.0,), 0.0))
    assert res.k_opt == 0.0 and res.sum_rate == 0.0 and res.beams is None


def test_bisect_generic():
    # feasible iff k <= 2.3 with power k
    def power_at(k, budget):
        return (k if k <= 2.3 else np.inf), "beams", 0

    L, U, beams, power, trace = bisect_k(power_at, 8.0, FairPolicy((1.0,), 100.0, 1e-4))
    assert L <= 2.3 < U and U - L <= 1e-4
    assert beams == "beams" and power == L
    assert all(s.lower <= s.upper for s in trace)


@pytest.mark.parametrize("seed", range(3))
def test_bracket_certificate_and_fairness(seed):
    rz = sample_channels(preset_geometry("A", antennas=4, users=2), seed)
    pol = FairPolicy((1.0, 2.0, 1.0), 100.0)
    res = solve_sum_rate(rz, pol)
    assert res.k_opt > 0
    assert np.array_equal(res.rates, res.k_opt * np.array([1.0, 2.0, 1.0]))
    assert res.rates[1] / res.rates[0] == 2.0
    for step in res.trace:
        if step.feasible:
            assert step.power < pol.p_tot
        assert step.upper - step.lower >= 0
    assert res.trace[-1].upper - res.trace[-1].lower <= pol.epsilon_k
    assert res.power <= pol.p_tot and res.beams.total_power == pytest.approx(res.power)
    above = solve_power_min(PowerMinSpec(rz, pol.thresholds(res.k_opt + 2 * pol.epsilon_k)))
    assert (not above.ok) or above.power * 1.01 > pol.p_tot


@pytest.mark.slow
def test_doubling_budget_never_hurts():
    geo = preset_geometry("A", antennas=4, users=1)
    worse = []
    for seed in range(50):
        rz = sample_channels(geo, seed)
        a = solve_sum_rate(rz, FairPolicy((1.0, 1.0, 1.0), 50.0)).k_opt
        b = solve_sum_rate(rz, FairPolicy((1.0, 1.0, 1.0), 100.0)).k_opt
        if b < a:
            worse.append((seed, a, b))
    assert worse == []

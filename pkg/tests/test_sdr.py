import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nomacast.channel import (ChannelRealization, RegionSpec, ScenarioGeometry, check_feasible,
                              preset_geometry, sample_channels, sdma_constraints)
from nomacast.cones.psd import svec
from nomacast.powermin import INFEASIBLE, PowerMinSpec, solve_power_min
from nomacast.sdr import (_param_map, hermitian_from_params, numerical_rank, realify,
                          sdr_lower_bound, structure_error, trace_row, unrealify)

from conftest import crandn

seeds = st.integers(0, 2 ** 32 - 1)


def hermitian(rng, M):
    A = crandn(rng, M, M)
    return A + A.conj().T


@given(seeds)
def test_realify_structure_and_traces(seed):
    rng = np.random.default_rng(seed)
    H, X = hermitian(rng, 4), hermitian(rng, 4)
    R = realify(X)
    assert structure_error(R) == 0.0
    assert np.array_equal(unrealify(R), X)
    assert np.trace(H @ X).real == pytest.approx(0.5 * np.trace(realify(H) @ R), rel=1e-12,
                                                 abs=1e-12)
    # eigenvalues of the embedding are those of X, each twice
    ev = np.sort(np.linalg.eigvalsh(X))
    assert np.allclose(np.sort(np.linalg.eigvalsh(R)), np.repeat(ev, 2), atol=1e-12)
    assert structure_error(rng.standard_normal((8, 8))) > 0


@given(seeds)
def test_parametrization(seed):
    rng = np.random.default_rng(seed)
    M = 3
    theta = rng.standard_normal(M * M)
    X = hermitian_from_params(theta, M)
    assert np.allclose(X, X.conj().T, atol=0)
    assert np.allclose(_param_map(M) @ theta, svec(realify(X)), atol=1e-14)
    H = hermitian(rng, M)
    assert trace_row(H, M) @ theta == pytest.approx(np.trace(H @ X).real, rel=1e-12, abs=1e-12)


def test_numerical_rank():
    assert numerical_rank(np.diag([1.0, 1e-7, 0.0])) == 1
    assert numerical_rank(np.diag([1.0, 1e-5, 0.0])) == 2
    assert numerical_rank(np.zeros((2, 2))) == 0


@pytest.mark.parametrize("seed", range(3))
def test_single_user_tight(seed):
    geo = ScenarioGeometry((RegionSpec(10, 50),), (1,), 4, 2.5, 1e-8)
    rz = sample_channels(geo, seed)
    spec = PowerMinSpec(rz, (5.0,))
    bound, ranks, status = sdr_lower_bound(spec)
    exact = 5.0 * rz.noise_power / np.sum(np.abs(rz.h[0]) ** 2)
    assert status == "ok" and ranks == [1]
    assert bound == pytest.approx(exact, rel=1e-6)


def test_vanishing_threshold():
    rz = sample_channels(preset_geometry("A", antennas=4, users=2), 1)
    b1 = sdr_lower_bound(PowerMinSpec(rz, (1e-3,) * 3)).bound
    b2 = sdr_lower_bound(PowerMinSpec(rz, (1e-6,) * 3)).bound
    assert b2 < b1 * 1e-2


@pytest.mark.parametrize("seed", range(4))
def test_bound_and_extraction(seed):
    rz = sample_channels(preset_geometry("A", antennas=6, users=2), seed)
    spec = PowerMinSpec.from_rates(rz, 1.5)
    res = sdr_lower_bound(spec)
    mm = solve_power_min(spec)
    assert res.ok and mm.ok
    assert res.bound <= mm.power + 1e-6
    for blk in res.blocks:
        assert structure_error(blk) <= 1e-8
        assert np.linalg.eigvalsh(blk)[0] >= -1e-8 * max(1.0, np.abs(blk).max())
    if res.rank_one:
        beams = res.extract_beams()
        assert check_feasible(beams, rz, spec.thresholds, slack=1e-4).ok
        assert beams.total_power == pytest.approx(res.bound, rel=1e-4)


def test_infeasible_relaxation():
    geo = ScenarioGeometry((RegionSpec(20, 20), RegionSpec(10, 10)), (1, 1), 1, 2.0, 1e-8)
    rz = ChannelRealization(geo, (np.array([[1e-2]]), np.array([[1e-2]])), ([20.0], [10.0]))
    spec = PowerMinSpec(rz, (2.0, 2.0))
    res = sdr_lower_bound(spec, sdma_constraints((1, 1), spec.thresholds))
    assert res.status == INFEASIBLE and res.bound == np.inf

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nomacast.channel import (BeamformerSet, ChannelRealization, RegionSpec, ScenarioGeometry,
                              check_feasible, dbm_to_mw, mw_to_dbm, noma_constraints,
                              preset_geometry, sample_channels, sdma_constraints, sinr_cross,
                              sinr_own)

from conftest import crandn


def test_preset_regions():
    geo = preset_geometry("A")
    assert [(r.d_min, r.d_max) for r in geo.regions] == [(90, 100), (40, 50), (10, 15)]
    geo = preset_geometry("D", 0)
    assert [(r.d_min, r.d_max) for r in geo.regions] == [(60, 70), (60, 70)]
    geo = preset_geometry("D", 50)
    assert [(r.d_min, r.d_max) for r in geo.regions] == [(60, 70), (10, 20)]
    geo = preset_geometry("E")
    assert [(r.d_min, r.d_max) for r in geo.regions] == [(70, 90), (10, 20)]
    assert preset_geometry("B").groups == 4 and preset_geometry("C").groups == 4


@pytest.mark.parametrize("args", [("Z",), ("D",), ("D", 60), ("D", -1), ("A", 10)])
def test_preset_errors(args):
    with pytest.raises(ValueError):
        preset_geometry(*args)


def test_geometry_validation():
    with pytest.raises(ValueError):
        RegionSpec(0.0, 1.0)
    with pytest.raises(ValueError):
        RegionSpec(5.0, 1.0)
    near, far = RegionSpec(10, 15), RegionSpec(90, 100)
    with pytest.raises(ValueError):
        ScenarioGeometry((near, far), (1, 1))
    with pytest.raises(ValueError):
        ScenarioGeometry((far,), (0,))
    with pytest.raises(ValueError):
        ScenarioGeometry((far,), (1, 2))


def test_fixed_distance_amplitude():
    # alpha = 2 at d = 10 gives |h| = |g| / 10; with |g| fixed by the draw we
    # check the distance scaling against the same draw at d = 1
    geo10 = ScenarioGeometry((RegionSpec(10, 10),), (3,), 4, 2.0, 1e-8)
    geo1 = ScenarioGeometry((RegionSpec(1, 1),), (3,), 4, 2.0, 1e-8)
    a, b = sample_channels(geo10, 4), sample_channels(geo1, 4)
    assert np.allclose(a.h[0], b.h[0] * 0.1, rtol=0, atol=1e-15)
    assert np.all(a.distances[0] == 10.0)


def test_same_seed_bit_identical():
    geo = preset_geometry("A")
    a, b = sample_channels(geo, 11), sample_channels(geo, 11)
    for x, y in zip(a.h, b.h):
        assert x.tobytes() == y.tobytes()
    c = sample_channels(geo, 12)
    assert not np.array_equal(a.h[0], c.h[0])


def test_channel_statistics():
    M, d, alpha, n = 4, 20.0, 2.5, 100_000
    geo = ScenarioGeometry((RegionSpec(d, d),), (n,), M, alpha, 1e-8)
    rz = sample_channels(geo, 1)
    gain = np.mean(np.sum(np.abs(rz.h[0]) ** 2, axis=1))
    assert abs(gain / (M * d ** -alpha) - 1) < 0.02
    geo = ScenarioGeometry((RegionSpec(40, 50),), (n,), 1, alpha, 1e-8)
    dist = sample_channels(geo, 2).distances[0]
    assert abs(dist.mean() / 45.0 - 1) < 0.01
    assert dist.min() >= 40 and dist.max() <= 50


def test_realization_is_read_only():
    rz = sample_channels(preset_geometry("A"), 0)
    with pytest.raises(ValueError):
        rz.h[0][0, 0] = 1.0


def test_sinr_examples():
    h = np.array([1.0 + 0j])
    W = np.array([[1.0], [0.5]], dtype=complex)
    # group 0 user: interference from beam 1
    assert sinr_own(W, h, 0, 0.75) == pytest.approx(1.0 / (0.25 + 0.75))
    # group 1 user: no later beams
    assert sinr_own(W, h, 1, 0.25) == pytest.approx(0.25 / 0.25)
    # group 1 user decoding message 0 sees beam 1 as interference
    assert sinr_cross(W, h, 1, 0, 0.75) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sinr_cross(W, h, 0, 0, 1.0)
    with pytest.raises(ValueError):
        sinr_own(W, h, 2, 1.0)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 2 * np.pi))
def test_sinr_phase_invariance(seed, theta):
    rng = np.random.default_rng(seed)
    W = crandn(rng, 3, 4)
    h = crandn(rng, 4)
    rot = np.exp(1j * theta)
    for g in range(3):
        assert sinr_own(W * rot, h, g, 0.1) == pytest.approx(sinr_own(W, h, g, 0.1), rel=1e-12)
        assert sinr_own(W, h * rot, g, 0.1) == pytest.approx(sinr_own(W, h, g, 0.1), rel=1e-12)


def test_constraint_sets():
    cons = noma_constraints((2, 2, 2), (1.0, 2.0, 3.0))
    assert sum(c.kind == "qos" for c in cons) == 6
    assert sum(c.kind == "sic" for c in cons) == 6
    assert all(c.interferers == tuple(range(c.target + 1, 3)) for c in cons)
    sd = sdma_constraints((1, 2), (1.0, 2.0))
    assert [c.interferers for c in sd] == [(1,), (0,), (0,)]


def test_check_feasible_examples():
    geo = ScenarioGeometry((RegionSpec(20, 20), RegionSpec(10, 10)), (1, 1), 1, 2.0, 1.0)
    rz = ChannelRealization(geo, (np.array([[1.0]]), np.array([[1.0]])), ([20.0], [10.0]))
    W = np.array([[2.0], [1.0]], dtype=complex)
    # own SINRs: group 0 -> 4 / 2 = 2, group 1 -> 1 / 1 = 1; SIC for group 1 -> 2
    assert check_feasible(W, rz, (2.0, 1.0)).ok
    rep = check_feasible(W, rz, (2.5, 1.0))
    assert not rep.ok and rep.worst_violation == pytest.approx(1 - 2 / 2.5)
    assert check_feasible(W, rz, (2.0 * (1 + 1e-7), 1.0), slack=1e-6).ok
    with pytest.raises(ValueError):
        check_feasible(W[:1], rz, (1.0, 1.0))


@given(st.floats(-60, 60))
def test_dbm_round_trip(dbm):
    assert float(mw_to_dbm(dbm_to_mw(dbm))) == pytest.approx(dbm, abs=1e-12)
    assert float(dbm_to_mw(mw_to_dbm(dbm_to_mw(dbm)))) == pytest.approx(float(dbm_to_mw(dbm)),
                                                                         rel=1e-12)


def test_beamformer_set():
    B = BeamformerSet(np.ones((2, 3)), np.full(3, 2.0))
    assert B.stacked().shape == (3, 3)
    assert B.total_power == pytest.approx(6 + 12)
    assert BeamformerSet.from_stacked(B.stacked(), with_new=True).total_power == B.total_power
    assert B.scaled(0.5).total_power == pytest.approx(18 / 4)
    with pytest.raises(ValueError):
        BeamformerSet(np.ones((2, 3)), np.ones(2))

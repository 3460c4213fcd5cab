import numpy as np
import pytest
from hypothesis import given, strategies as st

from nomacast.channel import sinr_cross, sinr_own
from nomacast.cones import NonNeg, SecondOrder, solve, ConeProgram
from nomacast.modeling import (ProgramBuilder, embed, phi, phi_rows, power_epigraph, qos_row,
                               sic_row, socp_init_rows, taylor_minorizer, unembed)

from conftest import crandn

seeds = st.integers(0, 2 ** 32 - 1)


def block_holds(block, x, tol=0.0):
    s = block.b - block.A @ x
    if isinstance(block.cone, NonNeg):
        return bool(s.min() >= -tol)
    assert isinstance(block.cone, SecondOrder)
    return bool(s[0] >= np.linalg.norm(s[1:]) - tol)


def test_phi_examples():
    assert np.array_equal(phi(np.array([1.0 + 0j]), np.array([1.0 + 0j])), [1.0, 0.0])
    assert np.array_equal(phi(np.array([1j]), np.array([1.0 + 0j])), [0.0, -1.0])
    with pytest.raises(ValueError):
        phi(np.ones(2), np.ones(3))


@given(seeds)
def test_phi_matches_complex_arithmetic(seed):
    rng = np.random.default_rng(seed)
    W, h = crandn(rng, 3, 5), crandn(rng, 5)
    x = embed(W)
    for k in range(3):
        z = np.vdot(h, W[k])
        p = phi_rows(h, k, 3) @ x
        assert abs(p[0] - z.real) <= 1e-14 * max(1, abs(z)) * 10
        assert abs(p[1] - z.imag) <= 1e-14 * max(1, abs(z)) * 10
        assert np.allclose(phi(h, W[k]), p, rtol=0, atol=1e-14)
        assert phi(h, W[k]) @ phi(h, W[k]) == pytest.approx(abs(z) ** 2, rel=1e-14)


@given(seeds)
def test_embedding_round_trip(seed):
    rng = np.random.default_rng(seed)
    W = crandn(rng, 4, 3)
    assert np.array_equal(unembed(embed(W), 4, 3), W)
    x = rng.standard_normal(24)
    assert np.array_equal(embed(unembed(x, 4, 3)), x)


def test_minorizer_examples():
    p = np.array([1.0, 0.0])
    m = taylor_minorizer(p)
    assert m(p) == pytest.approx(1.0)
    q = np.array([2.0, 0.0])
    assert m(q) == pytest.approx(3.0) and m(q) <= q @ q
    z = taylor_minorizer(np.zeros(2))
    for q in np.random.default_rng(0).standard_normal((10, 2)):
        assert z(q) == 0.0


@given(seeds)
def test_minorizer_dominance(seed):
    rng = np.random.default_rng(seed)
    p0, q = rng.standard_normal(2) * rng.exponential(3), rng.standard_normal(2) * 3
    m = taylor_minorizer(p0)
    assert m(q) <= q @ q + 1e-12 * (1 + q @ q)
    assert m(p0) == pytest.approx(p0 @ p0, rel=1e-12, abs=1e-15)
    # equality only at the expansion point: the gap is exactly ||q - p0||^2
    assert q @ q - m(q) == pytest.approx((q - p0) @ (q - p0), rel=1e-9, abs=1e-12)


def test_qos_row_without_interferers_is_linear():
    rng = np.random.default_rng(1)
    h = crandn(rng, 2)
    blk = qos_row(h, 0, 2.0, 0.5, np.array([1.0, 0.5]), 1)
    assert isinstance(blk.cone, NonNeg) and blk.A.shape == (1, 4)
    # zeroing the only interferer's channel response reproduces the linear row
    blk2 = qos_row(h, 0, 2.0, 0.5, np.array([1.0, 0.5]), 2)
    for _ in range(200):
        w = crandn(rng, 2, 2)
        # make beam 1 orthogonal to h
        w[1] -= h * np.vdot(h, w[1]) / np.vdot(h, h)
        x = embed(w)
        assert block_holds(blk, x[:4]) == block_holds(blk2, x, tol=0)


def _minorized_inequality(h, target, interferers, thr, noise, p0, W):
    m = taylor_minorizer(p0)(phi(h, W[target]))
    interf = sum(abs(np.vdot(h, W[k])) ** 2 for k in interferers)
    return m, thr * (interf + noise)


@pytest.mark.parametrize("balance", [1.0, 7.0])
def test_qos_row_sampling_oracle(balance):
    rng = np.random.default_rng(2)
    h = crandn(rng, 3)
    W0 = crandn(rng, 3, 3)
    p0 = phi(h, W0[0])
    blk = qos_row(h, 0, 1.5, 0.2, p0, 3, balance=balance)
    mismatches = checked = 0
    for _ in range(2000):
        W = W0 + crandn(rng, 3, 3) * rng.exponential(0.5)
        lhs, rhs = _minorized_inequality(h, 0, (1, 2), 1.5, 0.2, p0, W)
        if abs(lhs - rhs) > 1e-9 * (1 + abs(rhs)):
            checked += 1
            mismatches += block_holds(blk, embed(W)) != (lhs >= rhs)
    assert mismatches == 0 and checked > 1900


def test_sic_row_sampling_oracle():
    rng = np.random.default_rng(3)
    h = crandn(rng, 3)
    W0 = crandn(rng, 3, 3)
    p0 = phi(h, W0[0])
    blk = sic_row(h, 2, 0, 1.2, 0.1, p0, 3)
    mismatches = 0
    for _ in range(2000):
        W = W0 + crandn(rng, 3, 3) * rng.exponential(0.5)
        lhs, rhs = _minorized_inequality(h, 0, (1, 2), 1.2, 0.1, p0, W)
        if abs(lhs - rhs) > 1e-9 * (1 + abs(rhs)):
            mismatches += block_holds(blk, embed(W)) != (lhs >= rhs)
    assert mismatches == 0
    with pytest.raises(ValueError):
        sic_row(h, 1, 1, 1.0, 0.1, p0, 3)
    with pytest.raises(ValueError):
        qos_row(h, 0, 0.0, 0.1, p0, 3)


@given(seeds)
def test_inner_approximation_soundness(seed):
    # points satisfying the minorized rows satisfy the true SINR constraints
    rng = np.random.default_rng(seed)
    h = crandn(rng, 3)
    W0 = crandn(rng, 3, 3)
    thr, noise = 0.8, 0.3
    own = qos_row(h, 1, thr, noise, phi(h, W0[1]), 3)
    cross = sic_row(h, 1, 0, thr, noise, phi(h, W0[0]), 3)
    for _ in range(50):
        W = W0 + crandn(rng, 3, 3) * 0.3
        x = embed(W)
        if block_holds(own, x):
            assert sinr_own(W, h, 1, noise) >= thr * (1 - 1e-9)
        if block_holds(cross, x):
            assert sinr_cross(W, h, 1, 0, noise) >= thr * (1 - 1e-9)


def test_socp_init_single_antenna_closed_form():
    h = np.array([0.3 - 0.4j])
    thr, noise = 3.0, 0.01
    b = ProgramBuilder(1, 1)
    t = b.add_var()
    b.add(socp_init_rows(h, 0, (), thr, noise, 1))
    b.add(power_epigraph(1, 1, t))
    c = np.zeros(b.n)
    c[t] = 1.0
    sol = solve(b.build(c))
    assert sol.ok
    assert sol.x[t] ** 2 == pytest.approx(thr * noise / abs(h[0]) ** 2, rel=1e-7)


def test_socp_init_zero_interferers_is_linear():
    blk = socp_init_rows(np.array([1.0 + 0j]), 0, (), 4.0, 0.25, 1)
    assert isinstance(blk.cone, NonNeg)
    assert blk.b[0] == pytest.approx(-2.0 * 0.5)


@given(seeds)
def test_socp_init_inclusion(seed):
    rng = np.random.default_rng(seed)
    h = crandn(rng, 3)
    thr, noise = 1.3, 0.2
    blk = socp_init_rows(h, 0, (1, 2), thr, noise, 3)
    for _ in range(50):
        W = crandn(rng, 3, 3)
        W[0] *= 3
        if block_holds(blk, embed(W)):
            assert sinr_own(W, h, 0, noise) >= thr * (1 - 1e-9)


def test_power_epigraph_examples():
    blk = power_epigraph(1, 1)
    # one real beam (3, 4) in embedded form: Re = 3, Im = 4
    x = np.array([3.0, 4.0, 5.0])
    s = blk.b - blk.A @ x
    assert s[0] == pytest.approx(np.linalg.norm(s[1:]))
    b = ProgramBuilder(1, 1)
    t = b.add_var()
    b.add(power_epigraph(1, 1, t))
    b.linear([1.0, 0.0, 0.0], -3.0)
    b.linear([0.0, 1.0, 0.0], -4.0)
    c = np.zeros(3)
    c[t] = 1
    sol = solve(b.build(c))
    assert sol.x[t] == pytest.approx(5.0, abs=1e-7)
    b = ProgramBuilder(2, 2)
    t = b.add_var()
    b.add(power_epigraph(2, 2, t))
    c = np.zeros(b.n)
    c[t] = 1
    assert abs(solve(b.build(c)).x[t]) <= 1e-7


@given(seeds)
def test_power_epigraph_norm(seed):
    rng = np.random.default_rng(seed)
    W = crandn(rng, 3, 4)
    x = embed(W)
    blk = power_epigraph(3, 4)
    t = np.sqrt(np.sum(np.abs(W) ** 2))
    s = blk.b - blk.A @ np.r_[x, t]
    assert s[0] ** 2 == pytest.approx(np.sum(s[1:] ** 2), rel=1e-10)
    assert t ** 2 == pytest.approx(np.sum(np.abs(W) ** 2), rel=1e-10)


def test_builder_objective_size():
    b = ProgramBuilder(1, 2)
    with pytest.raises(ValueError):
        b.build(np.zeros(b.n + 1))
    assert isinstance(b.build(np.zeros(b.n)), ConeProgram)

"""Instance generators with optima known by construction.

A cone program built from a complementary pair ``(s, z)`` and a point ``x``
via ``b = A x + s`` and ``c = -A' z`` has ``x`` optimal (KKT holds exactly),
so its optimal value ``c @ x`` is available without any solver.
"""
import numpy as np

from nomacast.cones import PSD, ConeProgram, NonNeg, SecondOrder, Zero
from nomacast.cones.psd import svec


def soc_interior(rng, d, margin=0.5):
    u = rng.standard_normal(d - 1) * 0.5
    return np.r_[np.linalg.norm(u) + margin, u]


def soc_pair(rng, d):
    kind = rng.integers(3)
    u = rng.standard_normal(d - 1)
    u /= np.linalg.norm(u)
    if kind == 0:   # both on the boundary, facing each other
        return np.r_[1.0, u] * rng.uniform(0.5, 2), np.r_[1.0, -u] * rng.uniform(0.5, 2)
    if kind == 1:
        return soc_interior(rng, d), np.zeros(d)
    return np.zeros(d), soc_interior(rng, d)


def planted_program(rng, n_max=20, with_psd=False, with_zero=True):
    """``(program, optimal value, optimal x)``."""
    n = int(rng.integers(2, n_max + 1))
    cones, S, Z = [], [], []
    neq = int(rng.integers(0, 3)) if with_zero else 0
    if neq:
        cones.append(Zero(neq))
        S.append(np.zeros(neq))
        Z.append(rng.standard_normal(neq))
    l = int(rng.integers(0, 5))
    if l:
        mask = rng.random(l) < 0.5
        S.append(np.where(mask, rng.uniform(0.5, 2, l), 0.0))
        Z.append(np.where(mask, 0.0, rng.uniform(0.5, 2, l)))
        cones.append(NonNeg(l))
    for _ in range(int(rng.integers(1, 4))):
        d = int(rng.integers(2, 6))
        s, z = soc_pair(rng, d)
        cones.append(SecondOrder(d))
        S.append(s)
        Z.append(z)
    if with_psd:
        k = int(rng.integers(2, 5))
        Q, _ = np.linalg.qr(rng.standard_normal((k, k)))
        r = int(rng.integers(1, k))
        ls = np.r_[rng.uniform(0.5, 2, r), np.zeros(k - r)]
        lz = np.r_[np.zeros(r), rng.uniform(0.5, 2, k - r)]
        cones.append(PSD(k))
        S.append(svec(Q @ np.diag(ls) @ Q.T))
        Z.append(svec(Q @ np.diag(lz) @ Q.T))
    s, z = np.concatenate(S), np.concatenate(Z)
    A = rng.standard_normal((s.size, n))
    x = rng.standard_normal(n)
    b, c = A @ x + s, -A.T @ z
    return ConeProgram(c, A, b, cones), float(c @ x), x


def infeasible_program(rng):
    """Primal infeasible: ``y`` in the dual cone with ``A'y = 0`` and ``b'y = -1``."""
    n, d, l = int(rng.integers(2, 10)), int(rng.integers(3, 6)), int(rng.integers(1, 4))
    y = np.r_[rng.uniform(0.5, 2, l), soc_interior(rng, d, rng.uniform(0.1, 1))]
    B = rng.standard_normal((l + d, n))
    A = B - np.outer(y, y @ B) / (y @ y)
    b = rng.standard_normal(l + d)
    b -= y * (b @ y + 1.0) / (y @ y)
    z = np.r_[rng.uniform(0.5, 2, l), soc_interior(rng, d, 3.0)]
    return ConeProgram(-A.T @ z, A, b, [NonNeg(l), SecondOrder(d)])


def unbounded_program(rng):
    """Dual infeasible: a ray ``e`` with ``-A e`` in the cone and ``c'e = -1``."""
    n, d, l = int(rng.integers(2, 10)), int(rng.integers(3, 6)), int(rng.integers(1, 4))
    cones = [NonNeg(l), SecondOrder(d)]
    ray = np.r_[rng.uniform(0.5, 2, l), soc_interior(rng, d)]
    e = rng.standard_normal(n)
    B = rng.standard_normal((l + d, n))
    A = B + np.outer(-ray - B @ e, e) / (e @ e)
    s0 = np.r_[rng.uniform(0.5, 2, l), soc_interior(rng, d)]
    b = A @ rng.standard_normal(n) + s0
    c = rng.standard_normal(n)
    c -= e * (c @ e + 1.0) / (e @ e)
    return ConeProgram(c, A, b, cones)



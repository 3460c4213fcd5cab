"""Real-valued cone blocks for the beamforming constraints.

Beams are stacked into one real vector ``x = [Re w_0; Im w_0; Re w_1; ...]``.
Each block below describes ``s = b - A @ x`` with ``s`` in a cone, the
convention of :class:`nomacast.cones.ConeProgram`.  Extra scalar variables
(epigraph levels and the like) live in columns after the beam part.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .cones import ConeProgram, NonNeg, SecondOrder


def embed(W):
    """Stack complex beams ``(B, M)`` into the real vector ``x``."""
    W = np.atleast_2d(W)
    return np.concatenate([np.concatenate([w.real, w.imag]) for w in W])


def unembed(x, nbeams, M):
    X = np.asarray(x)[:2 * M * nbeams].reshape(nbeams, 2, M)
    return X[:, 0, :] + 1j * X[:, 1, :]


def phi(h, w):
    """``[Re(h^H w), Im(h^H w)]``."""
    h = np.asarray(h)
    w = np.asarray(w)
    if h.shape != w.shape:
        raise ValueError(f"length mismatch: {h.shape} vs {w.shape}")
    z = np.vdot(h, w)
    return np.array([z.real, z.imag])


def phi_rows(h, beam, nbeams):
    """``(2, 2 M nbeams)`` matrix ``P`` with ``P @ x == phi(h, w_beam)``."""
    h = np.asarray(h)
    M = h.size
    P = np.zeros((2, 2 * M * nbeams))
    a = 2 * M * beam
    P[0, a:a + M] = h.real
    P[0, a + M:a + 2 * M] = h.imag
    P[1, a:a + M] = -h.imag
    P[1, a + M:a + 2 * M] = h.real
    return P


@dataclass(frozen=True)
class Affine:
    """``x -> coef @ x + const``."""
    coef: np.ndarray
    const: float

    def __call__(self, x):
        return float(self.coef @ x + self.const)

    def compose(self, P):
        """The map ``x -> self(P @ x)``."""
        return Affine(self.coef @ P, self.const)


def taylor_minorizer(phi_point):
    """Tangent plane of ``||phi||^2`` at ``phi_point``, as an affine map of ``phi``.

    Because the squared norm is convex the plane lies below it everywhere:
    ``2 p.phi - ||p||^2 <= ||phi||^2`` with equality only at ``phi == p``.
    """
    p = np.asarray(phi_point, dtype=float)
    return Affine(2.0 * p, -float(p @ p))


@dataclass
class Block:
    A: np.ndarray
    b: np.ndarray
    cone: object


def _sinr_block(h, target, interferers, threshold, noise_power, phi_point, nbeams,
                balance=1.0):
    # minorizer/threshold =: L must dominate ||u||^2 with u = (phi_k..., sigma);
    # ||u||^2 <= L  <=>  ||(2u, L/c - c)|| <= L/c + c  for any c > 0.  A c near
    # sqrt(L) keeps both legs of the cone comparable when L is large.
    lin = taylor_minorizer(phi_point).compose(phi_rows(h, target, nbeams))
    a = lin.coef / threshold
    a0 = lin.const / threshold
    n = a.size
    if not interferers:
        return Block(-a[None, :], np.array([a0 - noise_power]), NonNeg(1))
    c = float(balance)
    k = len(interferers)
    A = np.zeros((2 * k + 3, n))
    b = np.zeros(2 * k + 3)
    A[0] = -a / c
    b[0] = a0 / c + c
    for j, beam in enumerate(interferers):
        A[1 + 2 * j:3 + 2 * j] = -2.0 * phi_rows(h, beam, nbeams)
    b[2 * k + 1] = 2.0 * np.sqrt(noise_power)
    A[2 * k + 2] = -a / c
    b[2 * k + 2] = a0 / c - c
    return Block(A, b, SecondOrder(2 * k + 3))


def balance_for(phi_point, threshold):
    """Cone balancing constant: ``sqrt(L)`` at the expansion point, at least 1."""
    p = np.asarray(phi_point, dtype=float)
    return max(1.0, float(np.sqrt(p @ p / threshold)))


def qos_row(h, g, threshold, noise_power, phi_point, nbeams, interferers=None, balance=1.0):
    """Inner convex approximation of the QoS constraint of a group-``g`` user.

    ``minorizer(phi(h, w_g)) >= threshold * (sum_k |h^H w_k|^2 + noise)`` with
    the beams after ``g`` as interferers unless ``interferers`` is given.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if interferers is None:
        interferers = tuple(range(g + 1, nbeams))
    return _sinr_block(h, g, tuple(interferers), threshold, noise_power, phi_point, nbeams,
                       balance)


def sic_row(h, g, i, threshold, noise_power, phi_point, nbeams, interferers=None, balance=1.0):
    """Same as :func:`qos_row` for a group-``g`` user decoding message ``i < g``."""
    if not 0 <= i < g:
        raise ValueError(f"SIC row needs 0 <= i < g, got i={i}, g={g}")
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if interferers is None:
        interferers = tuple(range(i + 1, nbeams))
    return _sinr_block(h, i, tuple(interferers), threshold, noise_power, phi_point, nbeams,
                       balance)


def constraint_block(h_groups, c, noise_power, phi_point, nbeams):
    """Minorized block for a :class:`~nomacast.channel.SinrConstraint` (balanced cone)."""
    return _sinr_block(h_groups[c.group][c.user], c.target, tuple(c.interferers),
                       c.threshold, noise_power, phi_point, nbeams,
                       balance_for(phi_point, c.threshold))


def socp_init_rows(h, target, interferers, threshold, noise_power, nbeams):
    """Conservative SOC block ``Re(h^H w_t) >= sqrt(thr) ||(phi_k..., sigma)||``.

    Restricting ``h^H w_t`` to the positive real axis makes the SINR
    constraint convex; any point satisfying it satisfies the original one.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    rt = np.sqrt(threshold)
    sigma = np.sqrt(noise_power)
    re = phi_rows(h, target, nbeams)[0]
    if not interferers:
        return Block(-re[None, :], np.array([-rt * sigma]), NonNeg(1))
    k = len(interferers)
    A = np.zeros((2 * k + 2, re.size))
    b = np.zeros(2 * k + 2)
    A[0] = -re
    for j, beam in enumerate(interferers):
        A[1 + 2 * j:3 + 2 * j] = -rt * phi_rows(h, beam, nbeams)
    b[-1] = rt * sigma
    return Block(A, b, SecondOrder(2 * k + 2))


def power_epigraph(nbeams, M, t_col=None):
    """Block ``||x|| <= t`` for the scalar ``t`` stored in column ``t_col``."""
    nx = 2 * M * nbeams
    t_col = nx if t_col is None else t_col
    A = np.zeros((nx + 1, max(t_col + 1, nx)))
    A[0, t_col] = -1.0
    A[1:, :nx] = -np.eye(nx)
    return Block(A, np.zeros(nx + 1), SecondOrder(nx + 1))


class ProgramBuilder:
    """Collects blocks over ``[x | extra scalars]`` into a :class:`ConeProgram`."""

    def __init__(self, nbeams, M):
        self.nbeams = nbeams
        self.M = M
        self.nx = 2 * M * nbeams
        self.n = self.nx
        self.blocks: List[Block] = []

    def add_var(self):
        self.n += 1
        return self.n - 1

    def add(self, block):
        self.blocks.append(block)
        return block

    def linear(self, coef, const):
        """Add ``coef @ z + const >= 0`` for the full variable vector ``z``."""
        coef = np.asarray(coef, dtype=float)
        return self.add(Block(-coef[None, :], np.array([float(const)]), NonNeg(1)))

    def build(self, c):
        c = np.asarray(c, dtype=float)
        if c.size != self.n:
            raise ValueError(f"objective has {c.size} entries, expected {self.n}")
        rows = sum(blk.A.shape[0] for blk in self.blocks)
        A = np.zeros((rows, self.n))
        b = np.empty(rows)
        r = 0
        for blk in self.blocks:
            k, w = blk.A.shape
            A[r:r + k, :w] = blk.A
            b[r:r + k] = blk.b
            r += k
        return ConeProgram(c, A, b, [blk.cone for blk in self.blocks])


@dataclass
class MMTrace:
    """Per-iteration record of an MM run.

    ``iterates[0]`` is the starting point; each later entry is one MM step
    ``(objective, max violation of the original constraints, solver iterations)``.
    """
    iterates: list = field(default_factory=list)
    converged: bool = False
    final_beams: Optional[object] = None
    status: str = "ok"

    def record(self, objective, violation, solver_iterations):
        self.iterates.append((float(objective), float(violation), int(solver_iterations)))

    @property
    def objectives(self):
        return np.array([it[0] for it in self.iterates])

    @property
    def violations(self):
        return np.array([it[1] for it in self.iterates])

    @property
    def mm_iterations(self):
        return max(len(self.iterates) - 1, 0)

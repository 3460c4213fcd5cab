"""Semidefinite-relaxation lower bound for multicast NOMA power minimization.

Lifting ``X_g = w_g w_g^H`` turns every SINR constraint into a linear one in
the ``X_g``.  Dropping ``rank X_g = 1`` leaves a convex program whose optimum
bounds the true minimum power from below.

A Hermitian ``X = P + iQ`` is PSD exactly when its real embedding
``[[P, -Q], [Q, P]]`` is.  Each ``X_g`` is parametrized by the free entries
of ``P`` (symmetric) and ``Q`` (antisymmetric), and a fixed linear map sends
them to the scaled vector of the embedding, which is the PSD slack the
cone solver sees.  The embedding structure therefore holds by construction.
Complex traces are half the real ones:
``Tr(H X) = 1/2 Tr(realify(H) realify(X))``.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import cones
from .cones import psd
from .channel import BeamformerSet, SinrConstraint, noma_constraints
from .powermin import FAILED, INFEASIBLE, OK, PowerMinSpec

RANK_TOL = 1e-6


def realify(X):
    """Real ``2M x 2M`` embedding ``[[Re X, -Im X], [Im X, Re X]]``."""
    X = np.asarray(X)
    return np.block([[X.real, -X.imag], [X.imag, X.real]])


def unrealify(R):
    """Complex matrix from the blocks of a real embedding (top-left / bottom-left)."""
    M = R.shape[0] // 2
    return R[:M, :M] + 1j * R[M:, :M]


def structure_error(R):
    """Largest deviation of ``R`` from the ``[[P, -Q], [Q, P]]`` pattern with ``P = P'``, ``Q = -Q'``."""
    M = R.shape[0] // 2
    P, Q = R[:M, :M], R[M:, :M]
    return float(max(np.max(np.abs(R[M:, M:] - P)), np.max(np.abs(R[:M, M:] + Q)),
                     np.max(np.abs(P - P.T)), np.max(np.abs(Q + Q.T))))


@lru_cache(maxsize=None)
def _param_map(M):
    """``(svec_dim(2M), M*M)`` matrix taking ``(P lower incl. diag, Q strict lower)`` to svec."""
    basis = []
    for j in range(M):
        for i in range(j, M):
            X = np.zeros((M, M), dtype=complex)
            X[i, j] = X[j, i] = 1.0
            basis.append(X)
    for j in range(M):
        for i in range(j + 1, M):
            X = np.zeros((M, M), dtype=complex)
            X[i, j] = 1j
            X[j, i] = -1j
            basis.append(X)
    T = np.stack([psd.svec(realify(X)) for X in basis], axis=1)
    T.setflags(write=False)
    return T


def hermitian_from_params(theta, M):
    """Complex ``X`` from its parameter vector (inverse of the basis used by the program)."""
    theta = np.asarray(theta, dtype=float)
    X = np.zeros((M, M), dtype=complex)
    k = 0
    for j in range(M):
        for i in range(j, M):
            X[i, j] += theta[k]
            if i != j:
                X[j, i] += theta[k]
            k += 1
    for j in range(M):
        for i in range(j + 1, M):
            X[i, j] += 1j * theta[k]
            X[j, i] -= 1j * theta[k]
            k += 1
    return X


def trace_row(H, M):
    """Row ``a`` with ``a @ theta == Tr(H X(theta))`` (complex trace, real result)."""
    return 0.5 * psd.svec(realify(H)) @ _param_map(M)


@dataclass
class SdrResult:
    """Relaxation optimum.  Unpacks as ``bound, ranks, status``."""
    bound: float                     # mW, sum of traces
    ranks: list
    status: str
    X: list = field(default_factory=list)        # complex M x M per beam
    blocks: list = field(default_factory=list)   # realified slack blocks as returned
    solver_status: Optional[str] = None

    def __iter__(self):
        return iter((self.bound, self.ranks, self.status))

    @property
    def ok(self):
        return self.status == OK

    @property
    def rank_one(self):
        return bool(self.ranks) and all(r == 1 for r in self.ranks)

    def extract_beams(self) -> BeamformerSet:
        """Principal eigenvector of each ``X_g`` scaled by ``sqrt(lambda_max)``."""
        beams = []
        for X in self.X:
            lam, V = np.linalg.eigh(X)
            beams.append(np.sqrt(max(lam[-1], 0.0)) * V[:, -1])
        return BeamformerSet(np.array(beams))


def numerical_rank(X, tol=RANK_TOL):
    lam = np.linalg.eigvalsh(X)
    top = lam[-1]
    if top <= 0:
        return 0
    return int(np.sum(lam > tol * top))


def build_program(h_groups, constraints: Sequence[SinrConstraint], nbeams, M):
    """Relaxation over ``nbeams`` Hermitian blocks; channels already noise-normalized."""
    T = _param_map(M)
    k = M * M
    n = k * nbeams
    rows_A, rows_b, cone_list = [], [], []
    for c in constraints:
        h = h_groups[c.group][c.user]
        a = trace_row(np.outer(h, h.conj()), M)
        coef = np.zeros(n)
        coef[c.target * k:(c.target + 1) * k] += a
        for j in c.interferers:
            coef[j * k:(j + 1) * k] -= c.threshold * a
        # coef @ theta - threshold >= 0
        rows_A.append(-coef[None, :])
        rows_b.append(np.array([-c.threshold]))
        cone_list.append(cones.NonNeg(1))
    for g in range(nbeams):
        A = np.zeros((T.shape[0], n))
        A[:, g * k:(g + 1) * k] = -T
        rows_A.append(A)
        rows_b.append(np.zeros(T.shape[0]))
        cone_list.append(cones.PSD(2 * M))
    obj = np.tile(trace_row(np.eye(M), M), nbeams)
    return cones.ConeProgram(obj, np.vstack(rows_A), np.concatenate(rows_b), cone_list)


def sdr_lower_bound(spec: PowerMinSpec, constraints: Optional[Sequence[SinrConstraint]] = None,
                    rank_tol=RANK_TOL) -> SdrResult:
    """Relaxation bound for ``spec`` (NOMA QoS + SIC rows unless ``constraints`` is given).

    Passing e.g. the SDMA constraint list bounds that scheme instead.
    """
    rz = spec.realization
    G, M = rz.groups, rz.geometry.antennas
    if constraints is None:
        constraints = noma_constraints(rz.geometry.users_per_region, spec.thresholds)
    prog = build_program(rz.normalized(), constraints, G, M)
    sol = cones.solve(prog)
    st = sol.status
    if st is cones.Status.INFEASIBLE:
        return SdrResult(np.inf, [], INFEASIBLE, solver_status=st.value)
    if not sol.ok:
        return SdrResult(np.nan, [], FAILED, solver_status=st.value)
    k = M * M
    X = [hermitian_from_params(sol.x[g * k:(g + 1) * k], M) for g in range(G)]
    blocks = []
    off = prog.m - G * psd.svec_dim(2 * M)
    for g in range(G):
        d = psd.svec_dim(2 * M)
        blocks.append(psd.smat(sol.s[off + g * d:off + (g + 1) * d], 2 * M))
    bound = float(sum(np.trace(x).real for x in X))
    ranks = [numerical_rank(x, rank_tol) for x in X]
    return SdrResult(bound, ranks, OK, X, blocks, st.value)

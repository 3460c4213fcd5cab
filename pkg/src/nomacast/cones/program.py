"""Standard-form cone programs and their solutions.

A :class:`ConeProgram` encodes::

    minimize    c @ x
    subject to  A @ x + s = b,   s in K = K_1 x K_2 x ...

where each ``K_i`` is one of :class:`Zero`, :class:`NonNeg`,
:class:`SecondOrder` or :class:`PSD` (svec layout, see ``psd.py``).  The
dual is ``maximize -b @ y  s.t.  A.T @ y + c = 0,  y in K*``.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .psd import svec_dim


@dataclass(frozen=True)
class Zero:
    dim: int

    @property
    def rows(self):
        return self.dim


@dataclass(frozen=True)
class NonNeg:
    dim: int

    @property
    def rows(self):
        return self.dim


@dataclass(frozen=True)
class SecondOrder:
    """``{(t, u) : ||u|| <= t}`` of total dimension ``dim``."""
    dim: int

    @property
    def rows(self):
        return self.dim


@dataclass(frozen=True)
class PSD:
    side: int

    @property
    def rows(self):
        return svec_dim(self.side)


MAX_PSD_SIDE = 64


class Status(str, Enum):
    OPTIMAL = "Optimal"
    ALMOST_OPTIMAL = "AlmostOptimal"   # stalled, but within the reduced tolerance
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"
    NUMERICAL_FAILURE = "NumericalFailure"


class ProgramError(ValueError):
    """Raised for a malformed cone program."""


@dataclass
class ConeProgram:
    c: np.ndarray
    A: object  # dense ndarray or scipy.sparse matrix, shape (m, n)
    b: np.ndarray
    cones: list

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        if not sp.issparse(self.A):
            self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        m, n = self.A.shape
        if self.c.size != n:
            raise ProgramError(f"c has length {self.c.size}, A has {n} columns")
        if self.b.size != m:
            raise ProgramError(f"b has length {self.b.size}, A has {m} rows")
        total = 0
        for k in self.cones:
            if not isinstance(k, (Zero, NonNeg, SecondOrder, PSD)):
                raise ProgramError(f"unknown cone block {k!r}")
            if isinstance(k, PSD) and not 1 <= k.side <= MAX_PSD_SIDE:
                raise ProgramError(f"PSD side must be in [1, {MAX_PSD_SIDE}]")
            if k.rows < 1:
                raise ProgramError(f"empty cone block {k!r}")
            total += k.rows
        if total != m:
            raise ProgramError(f"cone dimensions sum to {total}, A has {m} rows")

    @property
    def n(self):
        return self.c.size

    @property
    def m(self):
        return self.b.size

    def dense_A(self):
        return self.A.toarray() if sp.issparse(self.A) else self.A


@dataclass
class ConeSolution:
    status: Status
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    gap: float
    primal_res: float
    dual_res: float
    iterations: int
    pcost: float = np.nan
    dcost: float = np.nan
    info: dict = field(default_factory=dict)

    @property
    def residuals(self):
        return self.primal_res, self.dual_res

    @property
    def ok(self):
        """Usable primal-dual solution (optimal, or optimal to the reduced tolerance)."""
        return self.status in (Status.OPTIMAL, Status.ALMOST_OPTIMAL)


def _cone_token(k):
    if isinstance(k, Zero):
        return f"zero {k.dim}"
    if isinstance(k, NonNeg):
        return f"nonneg {k.dim}"
    if isinstance(k, SecondOrder):
        return f"soc {k.dim}"
    return f"psd {k.side}"


def dump_program(p, path):
    """Write ``p`` as a plain-text, matrix-market-like file."""
    A = sp.coo_matrix(p.A)
    with open(path, "w") as fh:
        fh.write("%%ConeProgram coordinate real general\n")
        fh.write("% minimize c'x  s.t.  A x + s = b,  s in K\n")
        fh.write(f"{p.m} {p.n} {A.nnz}\n")
        fh.write(f"cones {len(p.cones)}\n")
        for k in p.cones:
            fh.write(_cone_token(k) + "\n")
        fh.write("c\n")
        for v in p.c:
            fh.write(f"{float(v)!r}\n")
        fh.write("b\n")
        for v in p.b:
            fh.write(f"{float(v)!r}\n")
        fh.write("A\n")
        for i, j, v in zip(A.row, A.col, A.data):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


def load_program(path):
    """Read a file written by :func:`dump_program`."""
    kinds = {"zero": Zero, "nonneg": NonNeg, "soc": SecondOrder, "psd": PSD}
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("%")]
    m, n, nnz = (int(t) for t in lines[0].split())
    ncones = int(lines[1].split()[1])
    pos = 2
    cones = []
    for ln in lines[pos:pos + ncones]:
        kind, size = ln.split()
        cones.append(kinds[kind](int(size)))
    pos += ncones
    if lines[pos] != "c":
        raise ProgramError("expected 'c' section")
    c = np.array([float(t) for t in lines[pos + 1:pos + 1 + n]])
    pos += 1 + n
    if lines[pos] != "b":
        raise ProgramError("expected 'b' section")
    b = np.array([float(t) for t in lines[pos + 1:pos + 1 + m]])
    pos += 1 + m
    if lines[pos] != "A":
        raise ProgramError("expected 'A' section")
    entries = [ln.split() for ln in lines[pos + 1:pos + 1 + nnz]]
    rows = [int(e[0]) - 1 for e in entries]
    cols = [int(e[1]) - 1 for e in entries]
    vals = [float(e[2]) for e in entries]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
    return ConeProgram(c, A, b, cones)

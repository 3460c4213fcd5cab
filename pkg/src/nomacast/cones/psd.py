"""Dense symmetric-matrix blocks in scaled-vector (svec) form.

``svec`` stacks the lower triangle column by column and multiplies the
off-diagonal entries by sqrt(2), so ``svec(X) @ svec(Y) == trace(X @ Y)``.
"""
from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


def svec_dim(side):
    return side * (side + 1) // 2


@lru_cache(maxsize=None)
def _tri(side):
    rows, cols = [], []
    for j in range(side):
        for i in range(j, side):
            rows.append(i)
            cols.append(j)
    rows = np.array(rows)
    cols = np.array(cols)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, scale


def svec(X):
    """svec of one matrix, or of a stack ``(..., n, n)``."""
    side = X.shape[-1]
    r, c, w = _tri(side)
    return X[..., r, c] * w


def smat(v, side=None):
    """Inverse of :func:`svec` (accepts a stack along leading axes)."""
    v = np.asarray(v)
    if side is None:
        side = int(round((np.sqrt(8 * v.shape[-1] + 1) - 1) / 2))
    r, c, w = _tri(side)
    X = np.zeros(v.shape[:-1] + (side, side))
    vals = v / w
    X[..., r, c] = vals
    X[..., c, r] = vals
    return X


def identity(side):
    return svec(np.eye(side))


def min_eig(v, side):
    return float(np.linalg.eigvalsh(smat(v, side))[0])


class PSDScaling:
    """Nesterov-Todd scaling ``W(Z) = R' Z R`` for one block.

    ``R`` is built so that ``R^-1 S R^-T == R' Z R == diag(lam)``.
    """

    def __init__(self, s, z, side):
        S = smat(s, side)
        Z = smat(z, side)
        Ls = np.linalg.cholesky(S)
        Lz = np.linalg.cholesky(Z)
        U, lam, Vt = np.linalg.svd(Lz.T @ Ls)
        self.side = side
        self.lam = lam
        self.R = Ls @ Vt.T / np.sqrt(lam)
        self.Rinv = np.linalg.inv(self.R)

    @property
    def lam_svec(self):
        return svec(np.diag(self.lam))

    def _map(self, v, left, right):
        X = smat(v, self.side)
        return svec(left @ X @ right)

    def w(self, v):
        return self._map(v, self.R.T, self.R)

    def w_inv(self, v):
        return self._map(v, self.Rinv.T, self.Rinv)

    def w_trans(self, v):
        return self._map(v, self.R, self.R.T)

    def w_inv_trans(self, v):
        return self._map(v, self.Rinv, self.Rinv.T)

    def w_inv_trans_mat(self, G):
        """Apply ``W^-T`` to every column of ``G`` (rows = svec entries)."""
        X = smat(G.T, self.side)
        Y = self.Rinv @ X @ self.Rinv.T
        return svec(Y).T


def jprod_diag(lam, v, side):
    """``diag(lam) o V`` with the symmetrized product (XY + YX)/2."""
    V = smat(v, side)
    return svec(0.5 * (lam[:, None] + lam[None, :]) * V)


def jdiv_diag(lam, v, side):
    """Solve ``diag(lam) o U = V`` for ``U``."""
    V = smat(v, side)
    return svec(2.0 * V / (lam[:, None] + lam[None, :]))


def jprod(u, v, side):
    U = smat(u, side)
    V = smat(v, side)
    return svec(0.5 * (U @ V + V @ U))


def max_step_diag(lam, dv, side):
    """Largest ``a`` with ``diag(lam) + a * D`` PSD."""
    D = smat(dv, side)
    isq = 1.0 / np.sqrt(lam)
    e = np.linalg.eigvalsh(isq[:, None] * D * isq[None, :])[0]
    return np.inf if e >= 0 else -1.0 / e

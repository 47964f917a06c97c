"""Block SPD helpers and the grounded block-Laplacian solver."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

SPD_RTOL = 1e-12
PSD_SLACK = 1e-10
CG_THRESHOLD = 100_000


class SpdError(ValueError):
    pass


class SingularSystemError(ValueError):
    pass


def check_spd(block, what="block") -> np.ndarray:
    a = np.atleast_2d(np.asarray(block, dtype=float))
    if a.shape[0] != a.shape[1]:
        raise SpdError(f"{what} is not square: {a.shape}")
    if not np.all(np.isfinite(a)):
        raise SpdError(f"{what} has non-finite entries")
    if not np.allclose(a, a.T, rtol=1e-10, atol=1e-14 * max(1.0, np.abs(a).max())):
        raise SpdError(f"{what} is not symmetric")
    a = 0.5 * (a + a.T)
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise SpdError(f"{what} is not positive definite") from None
    lo = np.linalg.eigvalsh(a)[0]
    if lo < SPD_RTOL * np.linalg.norm(a, 2):
        raise SpdError(f"{what} is numerically singular (min eigenvalue {lo:.3g})")
    return a


def min_eig(a) -> float:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])


def psd_slack(a, scale=None) -> float:
    """Min eigenvalue of ``a`` relative to ``scale`` (default: norm of ``a``)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if scale is None:
        scale = np.linalg.norm(a, 2)
    return min_eig(a) / max(float(scale), 1e-300)


def psd_geq(a, b, slack=PSD_SLACK) -> bool:
    """a >= b in the PSD order, with relative slack."""
    scale = max(np.linalg.norm(np.atleast_2d(a), 2), np.linalg.norm(np.atleast_2d(b), 2), 1.0)
    return min_eig(np.asarray(a) - np.asarray(b)) >= -slack * scale


def parallel_combine(blocks) -> np.ndarray:
    """Parallel resistance formula (sum R_i^-1)^-1."""
    inv = sum(np.linalg.inv(b) for b in blocks)
    out = np.linalg.inv(inv)
    return 0.5 * (out + out.T)


def min_generalized_eig(a, b) -> float:
    """Smallest lambda with det(a - lambda b) = 0, via Cholesky whitening of b."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if np.array_equal(a, b):
        return 1.0
    if a.shape == (1, 1):
        return float(a[0, 0] / b[0, 0])
    chol = np.linalg.cholesky(b)
    w = np.linalg.solve(chol, np.linalg.solve(chol, a).T)
    return min_eig(w)


def block_laplacian(n, tails, heads, weights) -> sp.csc_matrix:
    """Assemble sum_e (a_e a_e^T) kron W_e for edges (tail, head) with blocks W_e."""
    weights = np.asarray(weights, dtype=float)
    k = weights.shape[1]
    ii, jj = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    t = np.asarray(tails)[:, None] * k
    h = np.asarray(heads)[:, None] * k
    w = weights.reshape(len(weights), -1)
    rows = np.concatenate([t + ii, h + ii, t + ii, h + ii]).ravel()
    cols = np.concatenate([t + jj, h + jj, h + jj, t + jj]).ravel()
    data = np.concatenate([w, w, -w, -w]).ravel()
    return sp.csc_matrix((data, (rows, cols)), shape=(n * k, n * k))


class GroundedSolver:
    """Factorization of a block Laplacian with one node's block removed.

    Removing the reference block makes the system SPD whenever the graph is
    weakly connected.
    """

    def __init__(self, laplacian, k, ground, method="auto"):
        self.k = k
        self.ground = ground
        nk = laplacian.shape[0]
        self.n = nk // k
        keep = np.ones(nk, dtype=bool)
        keep[ground * k:(ground + 1) * k] = False
        self.keep = keep
        self.matrix = laplacian[keep][:, keep].tocsc()
        if method == "auto":
            method = "cg" if self.n > CG_THRESHOLD else "direct"
        self.method = method
        if method == "direct":
            try:
                # SuperLU on a symmetric pattern: minimum-degree ordering on A^T+A.
                self._lu = spla.splu(self.matrix, permc_spec="MMD_AT_PLUS_A",
                                     options={"SymmetricMode": True})
            except RuntimeError as exc:
                raise SingularSystemError(str(exc)) from None
            diag = np.abs(self._lu.U.diagonal())
            if diag.size and diag.min() <= 1e-13 * diag.max():
                raise SingularSystemError("grounded Laplacian is singular")
        elif method == "cg":
            self._precond = _block_jacobi(self.matrix, k)
        else:
            raise ValueError(f"unknown solver method {method!r}")

    def reduced_index(self, node: int) -> int:
        """Row offset of ``node``'s block in the grounded system."""
        if node == self.ground:
            raise ValueError("ground node has no unknowns")
        return (node - (node > self.ground)) * self.k

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self.method == "direct":
            out = self._lu.solve(rhs)
        else:
            cols = rhs.reshape(rhs.shape[0], -1)
            out = np.column_stack([self._cg(c) for c in cols.T]).reshape(rhs.shape)
        if not np.all(np.isfinite(out)):
            raise SingularSystemError("grounded Laplacian is singular")
        return out

    def _cg(self, b):
        x, info = spla.cg(self.matrix, b, M=self._precond, rtol=1e-13,
                          atol=0.0, maxiter=20 * self.matrix.shape[0])
        if info != 0:
            raise SingularSystemError(f"conjugate gradient did not converge ({info})")
        return x

    def full(self, reduced: np.ndarray) -> np.ndarray:
        """Scatter a reduced solution back to all nodes (ground gets zero)."""
        out = np.zeros((self.n * self.k,) + reduced.shape[1:])
        out[self.keep] = reduced
        return out

    def node_blocks(self, targets) -> np.ndarray:
        """Diagonal blocks of the inverse grounded Laplacian for ``targets``."""
        targets = list(targets)
        k = self.k
        if not targets:
            return np.zeros((0, k, k))
        rhs = np.zeros((self.matrix.shape[0], k * len(targets)))
        offsets = [self.reduced_index(t) for t in targets]
        for j, off in enumerate(offsets):
            rhs[off:off + k, j * k:(j + 1) * k] = np.eye(k)
        sol = self.solve(rhs)
        out = np.empty((len(targets), k, k))
        for j, off in enumerate(offsets):
            blk = sol[off:off + k, j * k:(j + 1) * k]
            out[j] = 0.5 * (blk + blk.T)
        return out


def _block_jacobi(matrix, k):
    nb = matrix.shape[0] // k
    coo = matrix.tocoo()
    same = coo.row // k == coo.col // k
    dense = np.zeros((nb, k, k))
    np.add.at(dense, (coo.row[same] // k, coo.row[same] % k, coo.col[same] % k),
              coo.data[same])
    inv = np.linalg.inv(dense)
    return sp.block_diag(list(inv), format="csr")

"""Matrix utilities: factorization, leverage scores, weighted least squares, CSV I/O.

Matrices are plain numpy arrays or scipy.sparse CSR; helpers accept either.
Factorizations densify internally, which is the right trade at the tall-thin
shapes this package targets (n up to ~1e5, d up to a few dozen).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import DomainError, ParameterError, ShapeError

RANK_REL_THRESHOLD = 1e-10


def is_sparse(a) -> bool:
    return sp.issparse(a)


def to_dense(a) -> np.ndarray:
    if sp.issparse(a):
        return np.asarray(a.todense(), dtype=float)
    return np.asarray(a, dtype=float)


def nnz(a) -> int:
    if sp.issparse(a):
        return int(a.nnz)
    return int(np.count_nonzero(a))


def validate_matrix(a, name: str = "A"):
    """Check 2-d shape and finite entries; return the (possibly CSR) matrix."""
    if sp.issparse(a):
        mat = a.tocsr()
        if mat.ndim != 2:
            raise ShapeError(f"{name} must be 2-dimensional")
        if not np.all(np.isfinite(mat.data)):
            raise DomainError(f"{name} contains non-finite values")
        mat.sort_indices()
        return mat
    mat = np.asarray(a, dtype=float)
    if mat.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional")
    if not np.all(np.isfinite(mat)):
        raise DomainError(f"{name} contains non-finite values")
    return mat


def row_submatrix(a, idx):
    """Rows of a in the order given by idx (duplicates allowed)."""
    idx = np.asarray(idx, dtype=int)
    if sp.issparse(a):
        return a.tocsr()[idx]
    return np.asarray(a)[idx]


@dataclass(frozen=True)
class OrthoFactor:
    """Thin orthogonal factorization of a matrix, rank-revealing.

    q has orthonormal columns spanning the column space; singular values
    below RANK_REL_THRESHOLD times the largest are treated as zero.
    """

    q: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray
    rank: int

    def solve(self, c) -> np.ndarray:
        """Min-norm least-squares solution of the factored matrix against c."""
        cv = np.asarray(c, dtype=float)
        if cv.shape[0] != self.q.shape[0]:
            raise ShapeError("right-hand side length mismatch")
        if self.rank == 0:
            return np.zeros(self.v.shape[0])
        coef = (self.q.T @ cv) / self.singular_values
        return self.v @ coef


def thin_factorize(a) -> OrthoFactor:
    """SVD-based thin factorization with relative rank threshold 1e-10."""
    dense = to_dense(validate_matrix(a))
    n, d = dense.shape
    if n == 0 or d == 0:
        return OrthoFactor(np.zeros((n, 0)), np.zeros(0), np.zeros((d, 0)), 0)
    u, s, vt = np.linalg.svd(dense, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > RANK_REL_THRESHOLD * s[0]))
    return OrthoFactor(u[:, :rank], s[:rank], vt[:rank].T, rank)


def leverage_scores(a, method: str = "exact", seed: int | None = None) -> np.ndarray:
    """Row leverage scores: squared row norms of an orthonormal column basis.

    Basis-invariant, each score in [0, 1], and they sum to the rank.
    method="sketched" routes through a count-sketch subspace embedding for a
    cheaper 2-approximation on very tall inputs; it falls back to exact when
    the embedding would not be smaller than the input.
    """
    if method == "exact":
        f = thin_factorize(a)
        return np.clip(np.sum(f.q**2, axis=1), 0.0, 1.0)
    if method != "sketched":
        raise ParameterError(f"unknown leverage method {method!r}")

    mat = validate_matrix(a)
    n, d = mat.shape
    rows = 32 * d * d + 64
    if rows >= n:
        return leverage_scores(mat, method="exact")
    rng = np.random.default_rng(seed)
    buckets = rng.integers(0, rows, size=n)
    signs = rng.integers(0, 2, size=n) * 2.0 - 1.0
    embed = sp.csr_matrix((signs, (buckets, np.arange(n))), shape=(rows, n))
    compressed = to_dense(embed @ mat)
    f = thin_factorize(compressed)
    if f.rank == 0:
        return np.zeros(n)
    # scores of A against the embedded basis: ||A V S^{-1}||^2 rowwise
    g = f.v / f.singular_values
    proj = to_dense(mat @ g) if sp.issparse(mat) else mat @ g
    return np.clip(np.sum(proj**2, axis=1), 0.0, 1.0)


def weighted_least_squares(a, c, weights) -> np.ndarray:
    """argmin_x sum_i weights_i (a_i x - c_i)^2, min-norm on rank deficiency."""
    mat = validate_matrix(a)
    cv = np.asarray(c, dtype=float)
    w = np.asarray(weights, dtype=float)
    n, d = mat.shape
    if cv.shape != (n,) or w.shape != (n,):
        raise ShapeError("A, c, and weights must agree in length")
    if not np.all(np.isfinite(cv)):
        raise DomainError("c contains non-finite values")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DomainError("weights must be finite and nonnegative")
    mask = w > 0
    if not np.any(mask):
        raise ParameterError("all weights are zero; least squares is degenerate")
    root = np.sqrt(w[mask])
    sub = to_dense(row_submatrix(mat, np.flatnonzero(mask))) * root[:, None]
    rhs = cv[mask] * root
    factor = thin_factorize(sub)
    if factor.rank == 0:
        return np.zeros(d)
    return factor.solve(rhs)


# -- CSV instance formats ------------------------------------------------------
#
# Plain instance: one row per observation, first d columns are A, last is b.
# Weighted instance: same with an extra leading weight column.


def _load_csv(path, skip_header: bool) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1 if skip_header else 0, ndmin=2)
    if not np.all(np.isfinite(data)):
        raise DomainError(f"{path} contains non-finite values")
    return data


def read_instance_csv(path, skip_header: bool = False):
    data = _load_csv(path, skip_header)
    if data.shape[1] < 2:
        raise ShapeError("instance CSV needs at least two columns (A then b)")
    return data[:, :-1], data[:, -1]


def write_instance_csv(path, a, b):
    dense = to_dense(a)
    np.savetxt(path, np.column_stack([dense, np.asarray(b, dtype=float)]),
               delimiter=",", fmt="%.17g")


def read_weighted_csv(path, skip_header: bool = False):
    data = _load_csv(path, skip_header)
    if data.shape[1] < 3:
        raise ShapeError("weighted CSV needs at least three columns (w, A, b)")
    return data[:, 0], data[:, 1:-1], data[:, -1]


def write_weighted_csv(path, weights, a, b):
    dense = to_dense(a)
    stacked = np.column_stack(
        [np.asarray(weights, dtype=float), dense, np.asarray(b, dtype=float)]
    )
    np.savetxt(path, stacked, delimiter=",", fmt="%.17g")

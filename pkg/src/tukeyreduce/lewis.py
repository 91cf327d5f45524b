"""Lp Lewis weights via the contractive fixed-point iteration.

The Lewis weights of A at exponent p are the unique u with
u_i = (leverage of row i of diag(u)^(1/2-1/p) A); they generalize leverage
scores (p = 2 gives exactly the leverage scores) and satisfy sum(u) <= d.
The iteration u <- t^(p/2) * u^(1-p/2), with t the leverage scores of the
rescaled matrix, is a contraction for p < 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, ParameterError
from .linalg import leverage_scores, row_submatrix, validate_matrix

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class LewisWeights:
    p: float
    weights: np.ndarray
    iterations: int
    residual: float


def lewis_weights(a, p: float, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER,
                  best_effort: bool = False) -> LewisWeights:
    """Fixed point of u_i = leverage_i(diag(u)^(1/2-1/p) A).

    Initialized at the leverage scores of A.  The residual is
    max_i |u_i - leverage_i(scaled A)|.  Raises ConvergenceError when the
    residual stays above tol for max_iter iterations unless best_effort is
    set (the contraction guarantee covers p < 4; larger p may need it).
    """
    if not (np.isfinite(p) and p >= 1):
        raise ParameterError("Lewis weight exponent must satisfy p >= 1")
    mat = validate_matrix(a)
    n = mat.shape[0]
    u = leverage_scores(mat)
    if p == 2.0:
        return LewisWeights(p, u, 1, 0.0)

    nonzero = u > 0.0  # zero leverage <=> zero row; its weight stays zero
    nz_idx = np.flatnonzero(nonzero)
    sub = row_submatrix(mat, nz_idx)
    u_nz = u[nz_idx]
    expo = 0.5 - 1.0 / p
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        scale = u_nz**expo
        scaled = sub.multiply(scale[:, None]).tocsr() if hasattr(sub, "multiply") \
            else sub * scale[:, None]
        t = leverage_scores(scaled)
        residual = float(np.max(np.abs(u_nz - t))) if t.size else 0.0
        if residual <= tol:
            break
        u_nz = t ** (p / 2.0) * u_nz ** (1.0 - p / 2.0)
    out = np.zeros(n)
    out[nz_idx] = u_nz
    if residual > tol and not best_effort:
        raise ConvergenceError(
            f"Lewis weight iteration residual {residual:.3e} > tol "
            f"after {iterations} iterations (p={p})",
            residual=residual, iterations=iterations)
    return LewisWeights(p, out, iterations, residual)


def approx_lewis_weights(a, p: float, slack: float = 1.0, **kwargs) -> LewisWeights:
    """Exact weights inflated by a slack in [1, 2].

    Models a 2-approximate oracle (u <= u_hat <= 2u): downstream thresholds
    consume the inflated values; slack 1 is exact mode.
    """
    if not 1.0 <= slack <= 2.0:
        raise ParameterError("lewis slack must lie in [1, 2]")
    base = lewis_weights(a, p, **kwargs)
    return LewisWeights(base.p, base.weights * slack, base.iterations, base.residual)


@dataclass(frozen=True)
class EntryBoundReport:
    trials: int
    violations: int
    max_ratio: float
    slack: float


def entry_bound_report(a, u, p: float, trials: int = 100, seed: int = 0,
                       slack: float = 1.0 + 1e-6) -> EntryBoundReport:
    """Monte-Carlo check of |y_i|^p <= d^max(0,p/2-1) u_i ||y||_p^p over y = Ax.

    Draws standard normal x; rows with zero weight must have zero entries.
    Ratios above slack count as violations.
    """
    mat = validate_matrix(a)
    n, d = mat.shape
    uf = np.asarray(u, dtype=float)
    if uf.shape != (n,):
        raise ParameterError("u must have one weight per row")
    rng = np.random.default_rng(seed)
    dpow = float(d) ** max(0.0, p / 2.0 - 1.0)
    max_ratio = 0.0
    violations = 0
    positive = uf > 0
    for _ in range(trials):
        x = rng.standard_normal(d)
        y = np.asarray(mat @ x).ravel()
        total = float(np.sum(np.abs(y) ** p))
        if total == 0.0:
            continue
        ratios = np.abs(y[positive]) ** p / (dpow * uf[positive] * total)
        if ratios.size:
            max_ratio = max(max_ratio, float(ratios.max()))
            violations += int(np.sum(ratios > slack))
        # zero-weight rows must contribute nothing
        violations += int(np.sum(np.abs(y[~positive]) > 0.0))
    return EntryBoundReport(trials, violations, max_ratio, slack)

"""Structured sets of rows that can dominate a flat-loss objective.

For y = Ax, a coordinate is heavy when |y_i| exceeds the clipping point.
Rows capable of being heavy (for any x whose light part is bounded) have
large Lewis weights, so both finders threshold Lewis weights:

* heavy_rows_iterative: ceil(alpha) rounds; each round recomputes Lewis
  weights of the not-yet-selected rows and keeps those crossing 1/(2 alpha).
* heavy_rows_partitioned: fewer Lewis computations per row; each round
  randomly partitions all rows into ceil(alpha) groups and keeps rows whose
  in-group (2-approximate) Lewis weight crosses 1/6.

Both return sorted arrays of row indices.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .lewis import approx_lewis_weights, lewis_weights
from .linalg import row_submatrix, validate_matrix


def derived_seed(*parts) -> int:
    """Stable 63-bit seed from hashable parts; reproducible across runs."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class HeavyConfig:
    p: float
    tau: float
    alpha: float
    delta: float = 0.01
    seed: int = 0
    slack: float = 1.0  # Lewis approximation slack consumed by the 1/6 test
    size_const: float = 1.0  # constant on the selected-set size bound

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha >= 1):
            raise ParameterError("alpha must be >= 1")
        if not (0 < self.delta < 1):
            raise ParameterError("delta must lie in (0, 1)")
        if not (np.isfinite(self.p) and self.p >= 1):
            raise ParameterError("p must be >= 1")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ParameterError("tau must be positive")


def _dim_power(d: int, p: float) -> float:
    return float(d) ** max(0.0, p / 2.0 - 1.0)


def heavy_rows_iterative(a, cfg: HeavyConfig) -> np.ndarray:
    """Repeated full Lewis-weight passes; threshold 1/(2 alpha).

    Runs exactly ceil(alpha) rounds.  Once a row is selected it is removed,
    so remaining rows' weights grow and chains of near-heavy rows surface.
    Selected set size is at most O(d^max(p/2,1) alpha^2).
    """
    mat = validate_matrix(a)
    n, d = mat.shape
    threshold = 1.0 / (2.0 * cfg.alpha)
    dpow = _dim_power(d, cfg.p)
    picked = np.zeros(n, dtype=bool)
    for _ in range(math.ceil(cfg.alpha)):
        rest = np.flatnonzero(~picked)
        if rest.size == 0:
            continue
        u = lewis_weights(row_submatrix(mat, rest), cfg.p).weights
        picked[rest[dpow * u >= threshold]] = True
    return np.flatnonzero(picked)


def partitioned_round_count(d: int, cfg: HeavyConfig) -> int:
    """ceil(log2(|J|/delta)) with |J| the iterative-variant size bound."""
    j_bound = cfg.size_const * float(d) ** max(cfg.p / 2.0, 1.0) * cfg.alpha**2
    return max(1, math.ceil(math.log2(max(j_bound / cfg.delta, 2.0))))


def heavy_rows_partitioned(a, cfg: HeavyConfig) -> np.ndarray:
    """Randomized-partition variant: cheaper, succeeds w.p. >= 1 - delta.

    Each round partitions all n rows (including already-selected ones)
    uniformly into ceil(alpha) groups, computes per-group approximate Lewis
    weights, and keeps rows crossing 1/6.  Empty groups are skipped.
    """
    mat = validate_matrix(a)
    n, d = mat.shape
    if cfg.alpha > n:
        raise ParameterError(
            f"alpha={cfg.alpha} exceeds the number of rows {n}; "
            "cannot partition into more nonempty groups than rows")
    groups = math.ceil(cfg.alpha)
    dpow = _dim_power(d, cfg.p)
    picked = np.zeros(n, dtype=bool)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(partitioned_round_count(d, cfg)):
        labels = rng.integers(0, groups, size=n)
        for g in range(groups):
            rows = np.flatnonzero(labels == g)
            if rows.size == 0:
                continue
            u_hat = approx_lewis_weights(
                row_submatrix(mat, rows), cfg.p, slack=cfg.slack).weights
            picked[rows[dpow * u_hat >= 1.0 / 6.0]] = True
    return np.flatnonzero(picked)

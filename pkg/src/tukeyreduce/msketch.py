"""Oblivious multi-level sketch for flat-loss norms.

The sketch hashes each of the n input coordinates into one bucket: a level h
is drawn with probability 1/(beta b^h) (h = 0..hmax, geometrically rarer),
a bucket uniform among the N = b*c*m buckets of that level, and a random
sign is applied.  Level h buckets are weighted by beta*b^h, so the weighted
loss of the bucketed vector estimates the loss of the input at every scale
of contribution size simultaneously.  A clipped variant keeps only the
largest M* buckets per level, which removes the crude O(#levels) dilation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .exceptions import ParameterError, ShapeError
from .linalg import validate_matrix
from .loss import LossSpec

DEFAULT_B_CAP = 64


def default_branching(n: int) -> int:
    """Default level growth factor: n^(1/3) clamped into [2, 64].

    Keeps the level count at most ~4 for any desk-scale n, which is what
    bounds the unclipped estimator's dilation by a small constant.
    """
    return int(min(DEFAULT_B_CAP, max(2, math.ceil(n ** (1.0 / 3.0)))))


@dataclass(frozen=True)
class SketchSpec:
    """Sketch shape: m controls buckets per level (N = b*c*m), b the level
    decay, c the redundancy factor, gamma the clipping granularity, eps the
    accuracy target of the clipped estimator."""

    m: int = 64
    b: int | None = None  # None: resolved from n at draw time
    c: int = 8
    gamma: float = 2.0
    eps: float = 0.1

    def __post_init__(self):
        if not (isinstance(self.m, int) and self.m > 1):
            raise ParameterError("m must be an integer > 1")
        if self.b is not None and not (isinstance(self.b, int) and self.b > 1):
            raise ParameterError("b must be an integer > 1")
        if not (isinstance(self.c, int) and self.c > 1):
            raise ParameterError("c must be an integer > 1")
        if not self.gamma > 1:
            raise ParameterError("gamma must exceed 1")
        if not (0 < self.eps < 1):
            raise ParameterError("eps must lie in (0, 1)")

    def resolve_b(self, n: int) -> int:
        return self.b if self.b is not None else default_branching(n)

    def plan(self, n: int) -> tuple[int, int, int, float]:
        """(b, N, hmax, beta) for an input of length n; requires n >= m."""
        if n < self.m:
            raise ParameterError(f"need n >= m buckets-per-group ({n} < {self.m})")
        b = self.resolve_b(n)
        n_buckets = b * self.c * self.m
        hmax = int(math.floor(math.log(n / self.m) / math.log(b) + 1e-12))
        beta = (b - float(b) ** (-hmax)) / (b - 1)
        return b, n_buckets, hmax, beta

    def total_rows(self, n: int) -> int:
        b, n_buckets, hmax, _ = self.plan(n)
        return n_buckets * (hmax + 1)

    def clip_count(self, n: int) -> int:
        """Buckets kept per level by the clipped estimator (top |value|)."""
        b, _, _, beta = self.plan(n)
        keep_small = math.log(self.m / self.eps) / math.log(self.gamma)
        keep_large = math.log(2 * (1 + 3 * self.eps) * b / self.eps) / math.log(self.gamma)
        return int(math.ceil(b * self.m * keep_large + beta * self.m * keep_small))


@dataclass(frozen=True)
class SketchMatrix:
    """A drawn sketch: one signed nonzero per input coordinate."""

    n: int
    spec: SketchSpec
    b: int
    n_buckets: int  # N: buckets per level
    hmax: int
    beta: float
    levels: np.ndarray   # level per input coordinate
    buckets: np.ndarray  # bucket within level per coordinate
    signs: np.ndarray

    @property
    def rows(self) -> int:
        return self.n_buckets * (self.hmax + 1)

    @property
    def level_probabilities(self) -> np.ndarray:
        h = np.arange(self.hmax + 1)
        return 1.0 / (self.beta * self.b**h.astype(float))

    @cached_property
    def weights(self) -> np.ndarray:
        """Per-output-row weights: beta * b^h for the rows of level h."""
        per_level = self.beta * self.b ** np.arange(self.hmax + 1, dtype=float)
        return np.repeat(per_level, self.n_buckets)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        rows = self.buckets + self.n_buckets * self.levels
        return sp.csr_matrix(
            (self.signs.astype(float), (rows, np.arange(self.n))),
            shape=(self.rows, self.n))

    def apply(self, a):
        """Sketch a matrix (or vector) in one pass over its nonzeros."""
        arr = a if sp.issparse(a) else np.asarray(a, dtype=float)
        if arr.shape[0] != self.n:
            raise ShapeError("input length does not match the sketch")
        out = self.matrix @ arr
        return out if sp.issparse(out) else np.asarray(out)

    # -- estimators ---------------------------------------------------------

    def _check_sketched(self, v) -> np.ndarray:
        vec = np.asarray(v, dtype=float)
        if vec.shape != (self.rows,):
            raise ShapeError("expected a sketched vector (one entry per row)")
        return vec

    def estimate(self, v, loss: LossSpec) -> float:
        """Weighted loss of a sketched vector: sum_h beta b^h sum_i M(v[h,i])."""
        vec = self._check_sketched(v)
        return loss.total(vec, self.weights)

    def estimate_clipped(self, v, loss: LossSpec) -> float:
        """Same, but per level only the largest-|value| clip_count buckets count.

        Ties are broken toward the lower bucket index.  Equals estimate()
        whenever no level has more than clip_count nonzero buckets.
        """
        vec = self._check_sketched(v)
        keep = self.spec.clip_count(self.n)
        total = 0.0
        for h in range(self.hmax + 1):
            level = vec[h * self.n_buckets:(h + 1) * self.n_buckets]
            if keep < self.n_buckets:
                order = np.lexsort((np.arange(level.size), -np.abs(level)))
                level = level[order[:keep]]
            total += self.beta * self.b**h * float(np.sum(loss.value(level)))
        return total


def draw_sketch(n: int, spec: SketchSpec = SketchSpec(), seed: int = 0) -> SketchMatrix:
    """Draw the random sketch structure for inputs of length n."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ParameterError("n must be a positive integer")
    b, n_buckets, hmax, beta = spec.plan(int(n))
    probs = 1.0 / (beta * b ** np.arange(hmax + 1, dtype=float))
    rng = np.random.default_rng(seed)
    levels = rng.choice(hmax + 1, size=n, p=probs / probs.sum())
    buckets = rng.integers(0, n_buckets, size=n)
    signs = rng.integers(0, 2, size=n) * 2 - 1
    return SketchMatrix(int(n), spec, b, n_buckets, hmax, beta,
                        levels, buckets, signs)


def spec_for_row_budget(n: int, max_rows: int) -> SketchSpec:
    """Smallest-loss sketch spec whose output has at most max_rows rows.

    Searches small (m, c, b) combinations and returns the one with the most
    rows not exceeding the budget (larger m preferred on ties).  If nothing
    fits, returns the overall minimal-row spec so callers can still proceed;
    its row count will exceed the budget.
    """
    if max_rows < 1:
        raise ParameterError("row budget must be >= 1")
    best = None        # (rows, m, b, spec) maximal under budget
    smallest = None    # minimal rows overall
    for m in (2, 4, 8, 16, 32, 64):
        if m > n:
            continue
        for c in (2, 4, 8):
            for b in (2, 4, 8, 16, 32, 64):
                spec = SketchSpec(m=m, b=b, c=c)
                rows = spec.total_rows(n)
                if smallest is None or rows < smallest[0]:
                    smallest = (rows, spec)
                if rows <= max_rows:
                    key = (rows, m, b)
                    if best is None or key > (best[0], best[1], best[2]):
                        best = (rows, m, b, spec)
    if best is not None:
        return best[3]
    return smallest[1]


def sketch_instance(a, b_vec, spec: SketchSpec, seed: int = 0):
    """Sketch a regression instance: returns (sketch, SA, Sb, weights)."""
    mat = validate_matrix(a)
    bv = np.asarray(b_vec, dtype=float)
    if bv.shape != (mat.shape[0],):
        raise ShapeError("b must have one entry per row of A")
    sk = draw_sketch(mat.shape[0], spec, seed=seed)
    sa = sk.apply(mat)
    if sp.issparse(sa):
        sa = np.asarray(sa.todense())
    return sk, sa, sk.apply(bv), sk.weights.copy()

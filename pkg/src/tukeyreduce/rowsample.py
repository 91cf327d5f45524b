"""Row sampling that shrinks a flat-loss regression instance.

One sampling step partitions the current weights into dyadic classes,
finds rows of the augmented matrix [A b] that could dominate the objective
(kept deterministically), and keeps every other row with probability at
least 1/2, reweighting survivors by 1/p_i so the weighted objective stays
unbiased.  Iterating from all-ones weights shrinks the support geometrically
until a size target (or the theory floor, ~10x the deterministic mass) is
reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .exceptions import ParameterError, ShapeError, StagnationError, WeightInvariantError
from .heavy import HeavyConfig, derived_seed, heavy_rows_partitioned
from .lewis import approx_lewis_weights
from .linalg import is_sparse, row_submatrix, validate_matrix
from .loss import LossSpec

STALL_LIMIT = 3


@dataclass(frozen=True)
class WeightVector:
    """Sparse nonnegative row weights; support values are always >= 1."""

    n: int
    indices: np.ndarray
    values: np.ndarray

    @classmethod
    def ones(cls, n: int) -> "WeightVector":
        return cls(n, np.arange(n), np.ones(n))

    @classmethod
    def from_dense(cls, arr) -> "WeightVector":
        dense = np.asarray(arr, dtype=float)
        idx = np.flatnonzero(dense)
        return cls(dense.size, idx, dense[idx])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.indices] = self.values
        return out

    @property
    def support_size(self) -> int:
        return int(self.indices.size)

    @property
    def max_value(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    def validate(self, value_cap: float | None = None):
        idx = np.asarray(self.indices)
        vals = np.asarray(self.values, dtype=float)
        if idx.shape != vals.shape:
            raise WeightInvariantError("indices and values must align")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise WeightInvariantError("support index out of range")
        if idx.size > 1 and np.any(np.diff(idx) <= 0):
            raise WeightInvariantError("support indices must be strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise WeightInvariantError("weights must be finite")
        if np.any(vals < 1.0 - 1e-12):
            raise WeightInvariantError("support weights must be >= 1")
        if value_cap is not None and vals.size and vals.max() > value_cap * (1 + 1e-12):
            raise WeightInvariantError(
                f"max weight {vals.max():.3e} exceeds cap {value_cap:.3e}")


def weight_classes(values) -> dict[int, np.ndarray]:
    """Dyadic classes: index set of entries with 2^(j-1) <= value < 2^j.

    Keys are the exponents j (>= 1 when all values >= 1); only occupied
    classes appear.  Computed from the binary exponent, so boundaries are
    exact (a weight of exactly 2^k lands in class k+1).
    """
    vals = np.asarray(values, dtype=float)
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise WeightInvariantError("class values must be positive and finite")
    exps = np.frexp(vals)[1]  # value = m * 2^e with m in [0.5, 1)
    return {int(j): np.flatnonzero(exps == j) for j in np.unique(exps)}


@dataclass(frozen=True)
class SampleConfig:
    """Knobs for one sampling step and the reduction driver.

    eps/delta are the accuracy/failure budgets.  The dimensionless constants
    c_alpha, c_y, c_samp scale the theory's untracked O(1) factors; defaults
    are tuned so that desk-scale instances (n ~ 1e4, d ~ 20) get a useful
    group count (alpha ~ 3) and an O(1) oversampling boost.  The divisors
    apply the per-step eps/O(log n), delta/O(log n) split; 1 keeps the full
    budget per step, which is the only workable choice at desk scale.
    """

    loss: LossSpec
    eps: float = 0.5
    delta: float = 0.05
    target_rows: int | None = None
    max_depth: int = 64
    seed: int = 0
    c_alpha: float = 0.02
    c_y: float = 3e-4
    c_samp: float = 1.0
    stop_factor: float = 10.0
    net_size_proxy: float | None = None
    lewis_slack: float = 1.0
    eps_divisor: float = 1.0
    delta_divisor: float = 1.0
    heavy_size_const: float = 1.0

    def __post_init__(self):
        if not (0 < self.eps < 1):
            raise ParameterError("eps must lie in (0, 1)")
        if not (0 < self.delta < 1):
            raise ParameterError("delta must lie in (0, 1)")
        if self.target_rows is not None and self.target_rows < 1:
            raise ParameterError("target_rows must be >= 1")
        if self.max_depth < 1:
            raise ParameterError("max_depth must be >= 1")
        if self.eps_divisor <= 0 or self.delta_divisor <= 0:
            raise ParameterError("divisors must be positive")

    @property
    def step_eps(self) -> float:
        return self.eps / self.eps_divisor

    @property
    def step_delta(self) -> float:
        return min(0.5, self.delta / self.delta_divisor)

    def struct_delta(self, n: int) -> float:
        return min(0.5, self.step_delta / (4.0 * math.log2(max(n, 2))))

    def alpha(self, n: int, d_aug: int) -> float:
        """Group count for heavy finding; grows with the sandwich ratio."""
        proxy = self.net_size_proxy if self.net_size_proxy is not None else float(n)
        inner = max(proxy * math.log2(max(n, 2)) / self.step_delta, math.e)
        val = (self.c_alpha * self.loss.sandwich_ratio
               * math.log(inner) / self.step_eps**2)
        return max(1.0, val)

    def oversample_factor(self, n: int, d_aug: int) -> float:
        """The per-row boost multiplying the approximate Lewis weight."""
        eps = self.step_eps
        ratio = self.loss.sandwich_ratio
        term_dim = d_aug * max(math.log(1.0 / eps), 0.0)
        term_fail = math.log(max(math.log2(max(n, 2)) / self.step_delta, math.e))
        term_main = ratio * d_aug * math.log(max(n / eps, math.e)) / eps**2
        return self.c_y * (term_dim + term_fail + term_main)


@dataclass
class StepInfo:
    support_before: int
    support_after: int
    alpha: float
    oversample_factor: float
    heavy_counts: dict[int, int] = field(default_factory=dict)
    class_sizes: dict[int, int] = field(default_factory=dict)
    deterministic_mass: float = 0.0  # heavy rows plus capped oversampling mass
    phase: str = "contract"


def _augmented(a, b, rows) -> "np.ndarray | sp.csr_matrix":
    sub = row_submatrix(a, rows)
    col = np.asarray(b, dtype=float)[rows]
    if is_sparse(sub):
        return sp.hstack([sub, col[:, None]], format="csr")
    return np.column_stack([sub, col])


def sampling_probabilities(a, b, w: WeightVector, cfg: SampleConfig,
                           seed: int | None = None):
    """Per-support-row keep probabilities for one step.

    Returns (probs, heavy_mask, info) aligned with w.indices.  Heavy rows get
    probability 1; everything else gets 1/2 plus a Lewis-weight-proportional
    boost, capped at 1.
    """
    mat = validate_matrix(a)
    bv = np.asarray(b, dtype=float)
    n, d = mat.shape
    if bv.shape != (n,):
        raise ShapeError("b must have one entry per row of A")
    if w.n != n:
        raise ShapeError("weight vector length does not match A")
    w.validate(value_cap=float(n) ** 2)
    if seed is None:
        seed = cfg.seed

    d_aug = d + 1
    p_loss = cfg.loss.p
    dpow = float(d_aug) ** max(0.0, p_loss / 2.0 - 1.0)
    alpha = cfg.alpha(n, d_aug)
    boost = cfg.oversample_factor(n, d_aug)

    probs = np.ones(w.support_size)
    heavy_mask = np.zeros(w.support_size, dtype=bool)
    info = StepInfo(w.support_size, -1, alpha, boost)
    mass = 0.0
    for j, positions in weight_classes(w.values).items():
        rows = w.indices[positions]
        aug = _augmented(mat, bv, rows)
        hcfg = HeavyConfig(
            p=p_loss, tau=cfg.loss.tau, alpha=min(alpha, float(rows.size)),
            delta=cfg.struct_delta(n), seed=derived_seed(seed, "heavy", j),
            slack=cfg.lewis_slack, size_const=cfg.heavy_size_const)
        local_heavy = heavy_rows_partitioned(aug, hcfg)
        u_hat = approx_lewis_weights(aug, p_loss, slack=cfg.lewis_slack).weights
        p_vec = np.minimum(1.0, 0.5 + cfg.c_samp * dpow * u_hat * boost)
        p_vec[local_heavy] = 1.0
        probs[positions] = p_vec
        heavy_mask[positions[local_heavy]] = True
        info.heavy_counts[j] = int(local_heavy.size)
        info.class_sizes[j] = int(rows.size)
        nonheavy = np.setdiff1d(np.arange(rows.size), local_heavy,
                                assume_unique=True)
        mass += local_heavy.size + float(
            np.minimum(1.0, cfg.c_samp * dpow * u_hat[nonheavy] * boost).sum())
    info.deterministic_mass = mass
    return probs, heavy_mask, info


def sample_step(a, b, w: WeightVector, cfg: SampleConfig,
                seed: int | None = None, return_info: bool = False):
    """One unbiased shrink: keep row i w.p. p_i >= 1/2, reweight by 1/p_i.

    E[w'] = w coordinatewise and w'_i <= 2 w_i always.  Draws use per-class
    derived seeds, so results do not depend on class iteration order.
    """
    if seed is None:
        seed = cfg.seed
    probs, heavy_mask, info = sampling_probabilities(a, b, w, cfg, seed=seed)
    keep = np.zeros(w.support_size, dtype=bool)
    for j, positions in weight_classes(w.values).items():
        rng = np.random.default_rng(derived_seed(seed, "draw", j))
        keep[positions] = rng.random(positions.size) < probs[positions]
    keep |= heavy_mask  # p=1 rows are kept regardless of the draw
    new_w = WeightVector(w.n, w.indices[keep], w.values[keep] / probs[keep])
    info.support_after = new_w.support_size
    return (new_w, info) if return_info else new_w


def descent_step(a, b, w: WeightVector, target: int, cfg: SampleConfig,
                 seed: int | None = None, return_info: bool = False):
    """Shrink toward an explicit row target with Lewis-proportional keeps.

    Past the retention floor every surviving row's in-class importance
    crosses the deterministic threshold, so contract steps keep everything.
    A hard size target instead keeps row i with probability
    p_i = max(1/2, min(1, target * u_i / sum(u))), with u the Lewis weights
    of the weighted augmented matrix diag(w)^(1/p) [A b], reweighting
    survivors by 1/p_i.  Unbiasedness and the p_i >= 1/2 floor carry over;
    rows that can single-handedly dominate (u_i near 1) still get p_i = 1
    once target >= d+1.
    """
    mat = validate_matrix(a)
    bv = np.asarray(b, dtype=float)
    n = mat.shape[0]
    if bv.shape != (n,):
        raise ShapeError("b must have one entry per row of A")
    if w.n != n:
        raise ShapeError("weight vector length does not match A")
    if target < 1:
        raise ParameterError("descent target must be >= 1")
    w.validate(value_cap=float(n) ** 2)
    if seed is None:
        seed = cfg.seed

    aug = _augmented(mat, bv, w.indices)
    scale = w.values ** (1.0 / cfg.loss.p)
    scaled = (aug.multiply(scale[:, None]).tocsr() if is_sparse(aug)
              else aug * scale[:, None])
    u = approx_lewis_weights(scaled, cfg.loss.p, slack=cfg.lewis_slack).weights
    total = float(u.sum())
    if total > 0:
        probs = np.maximum(0.5, np.minimum(1.0, target * u / total))
    else:
        probs = np.full(w.support_size, 0.5)
    rng = np.random.default_rng(derived_seed(seed, "descent"))
    keep = rng.random(w.support_size) < probs
    new_w = WeightVector(w.n, w.indices[keep], w.values[keep] / probs[keep])
    info = StepInfo(w.support_size, new_w.support_size, math.nan, math.nan,
                    deterministic_mass=float(np.sum(probs >= 1.0)),
                    phase="descent")
    return (new_w, info) if return_info else new_w


@dataclass
class ReduceInfo:
    depth: int
    steps: list[StepInfo]
    stalled: bool = False


def reduce_rows(a, b, cfg: SampleConfig, return_info: bool = False):
    """Iterate sample_step from all-ones weights down to a small support.

    Without a target, stops when the support reaches stop_factor times the
    step's deterministic mass (the theory floor) or at max_depth.  With
    cfg.target_rows set the floor is overridden: once contract steps reach
    it (or stop shrinking), descent_step pushes on to the target.  Three
    consecutive non-shrinking steps in the active phase raise
    StagnationError carrying the last valid weights.
    """
    mat = validate_matrix(a)
    n, d = mat.shape
    target = cfg.target_rows
    if target is not None and target < d + 1:
        raise ParameterError(f"target_rows must be at least d+1 = {d + 1}")
    w = WeightVector.ones(n)
    info = ReduceInfo(0, [])
    if target is not None and n <= target:
        return (w, info) if return_info else w

    stall = 0
    phase = "contract"
    for depth in range(1, cfg.max_depth + 1):
        step_seed = derived_seed(cfg.seed, "step", depth)
        if phase == "contract":
            w_next, step = sample_step(mat, b, w, cfg, seed=step_seed,
                                       return_info=True)
        else:
            w_next, step = descent_step(mat, b, w, target, cfg,
                                        seed=step_seed, return_info=True)
        info.steps.append(step)
        info.depth = depth
        if w_next.support_size == 0:
            break  # keep the previous (small but nonempty) weights
        shrunk = w_next.support_size < w.support_size
        floor = cfg.stop_factor * step.deterministic_mass
        if target is not None and phase == "contract" and (
                not shrunk or w_next.support_size <= floor):
            phase = "descent"  # retention floor reached; stall clock restarts
            stall = 0
        elif not shrunk:
            stall += 1
            if stall >= STALL_LIMIT:
                raise StagnationError(
                    f"support stuck at {w_next.support_size} rows for "
                    f"{STALL_LIMIT} consecutive steps",
                    weights=w_next, history=info.steps)
        else:
            stall = 0
        w = w_next
        threshold = target if target is not None else floor
        if w.support_size <= threshold:
            break
    return (w, info) if return_info else w


@dataclass(frozen=True)
class PreservationReport:
    probes: int
    eps: float
    max_deviation: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.eps


def lp_preservation_report(a, b, w_before: WeightVector, w_after: WeightVector,
                           p: float, eps: float, probes: int = 100,
                           seed: int = 0) -> PreservationReport:
    """Monte-Carlo check that one step preserved weighted l_p residual mass.

    For random Gaussian x and y = Ax - b, compares sum_i w_i |y_i|^p before
    and after; reports the largest relative deviation over the probes.
    """
    mat = validate_matrix(a)
    bv = np.asarray(b, dtype=float)
    n, d = mat.shape
    rng = np.random.default_rng(seed)
    dense_before = w_before.to_dense()
    dense_after = w_after.to_dense()
    worst = 0.0
    for _ in range(probes):
        x = rng.standard_normal(d)
        y = np.abs(np.asarray(mat @ x).ravel() - bv) ** p
        before = float(dense_before @ y)
        after = float(dense_after @ y)
        if before > 0:
            worst = max(worst, abs(after - before) / before)
        elif after > 0:
            worst = math.inf
    return PreservationReport(probes, eps, worst)

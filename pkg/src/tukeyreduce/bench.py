"""Benchmark harness: reduce an instance at several target sizes and compare
the quality of the reduced-instance solutions against full-instance solves.

Each (method, size, repetition) cell reduces the instance, solves the reduced
weighted problem, lifts the solution back (the coordinate space is unchanged,
so lifting is the identity), and reports the unweighted-objective ratio
against the best known solution for that repetition.  Ratios are >= 1 by
construction because the candidate itself joins the reference pool.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError, StagnationError
from .heavy import derived_seed
from .linalg import row_submatrix, to_dense, validate_matrix
from .loss import LossSpec
from .msketch import sketch_instance, spec_for_row_budget
from .rowsample import SampleConfig, reduce_rows
from .solver import SolveReport, irls_solve

METHODS = ("rowsample", "msketch", "msketch-clipped")
THREADS_ENV = "TUKEYREDUCE_THREADS"
CSV_HEADER = "method,size,rep,ratio,wall_time_ms"


def gen_gaussian(n: int, d: int, seed: int = 0):
    """Standard normal instance: A is n x d, b has length n."""
    if n < 1 or d < 1:
        raise ParameterError("n and d must be positive")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, d)), rng.standard_normal(n)


def inject_outliers(b, fraction: float, magnitude: float = 1e4,
                    seed: int = 0) -> np.ndarray:
    """Overwrite floor(fraction*n) distinct entries of b with `magnitude`."""
    if not 0.0 <= fraction <= 1.0:
        raise ParameterError("outlier fraction must lie in [0, 1]")
    bv = np.asarray(b, dtype=float).copy()
    count = int(math.floor(fraction * bv.size))
    if count:
        rng = np.random.default_rng(seed)
        idx = rng.choice(bv.size, size=count, replace=False)
        bv[idx] = magnitude
    return bv


@dataclass(frozen=True)
class BenchPlan:
    n: int
    d: int
    loss: LossSpec
    sizes: tuple[int, ...]
    methods: tuple[str, ...] = METHODS
    reps: int = 10
    seed: int = 0
    outlier_fraction: float = 0.0
    outlier_magnitude: float = 1e4
    restarts: int = 10
    max_iter: int = 50
    tol: float = 1e-8
    sample_eps: float = 0.5
    sample_delta: float = 0.05

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ParameterError(f"unknown method {m!r}")
        if not self.sizes:
            raise ParameterError("at least one size is required")
        if any(s < self.d + 1 for s in self.sizes):
            raise ParameterError("every size must be at least d+1")
        if self.reps < 1:
            raise ParameterError("reps must be >= 1")
        sketching = any(m.startswith("msketch") for m in self.methods)
        if sketching and self.loss.p > 2:
            raise ParameterError(
                "sketch estimators support growth exponent p <= 2 only")


@dataclass
class BenchResult:
    rows: list[dict] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def _reference(plan: BenchPlan, a, b, rep: int):
    report = irls_solve(a, b, plan.loss, restarts=plan.restarts,
                        max_iter=plan.max_iter, tol=plan.tol,
                        seed=derived_seed(plan.seed, "reference", rep))
    # the trivial candidate x = 0 joins the reference pool so the reported
    # optimum can never exceed the do-nothing objective
    zero_obj = plan.loss.total(-np.asarray(b, dtype=float))
    if zero_obj < report.objective:
        x0 = np.zeros(a.shape[1])
        report = SolveReport(
            x=x0, objective=zero_obj, iterations=0, restarts=plan.restarts,
            converged=False, trace=[zero_obj], traces=report.traces,
            candidates=report.candidates + [x0],
            candidate_objectives=report.candidate_objectives + [zero_obj])
    return report


def _run_cell(plan: BenchPlan, a, b, refs, method: str, size: int, rep: int):
    n = a.shape[0]
    row = {"method": method, "size": size, "rep": rep}
    if size > n:
        row.update(ratio=float("nan"), wall_time_ms=0.0,
                   note="skipped: size exceeds n")
        return row
    cell_seed = derived_seed(plan.seed, method, size, rep)
    ref = refs[rep]
    start = time.perf_counter()
    stalled = False
    if method == "rowsample":
        if size >= n:
            # all-ones weights: the reduced problem is the full problem
            x_hat = ref.x
            achieved = n
        else:
            cfg = SampleConfig(plan.loss, eps=plan.sample_eps,
                               delta=plan.sample_delta, target_rows=size,
                               seed=cell_seed)
            try:
                w = reduce_rows(a, b, cfg)
            except StagnationError as err:
                w = err.weights
                stalled = True
            sub_a = row_submatrix(a, w.indices)
            sub_b = np.asarray(b)[w.indices]
            rep_report = irls_solve(sub_a, sub_b, plan.loss, w=w.values,
                                    restarts=plan.restarts,
                                    max_iter=plan.max_iter, tol=plan.tol,
                                    seed=cell_seed)
            x_hat = rep_report.x
            achieved = w.support_size
    else:
        spec = spec_for_row_budget(n, size)
        sk, sa, sb, wts = sketch_instance(a, b, spec, seed=cell_seed)
        report = irls_solve(sa, sb, plan.loss, w=wts, restarts=plan.restarts,
                            max_iter=plan.max_iter, tol=plan.tol,
                            seed=cell_seed)
        if method == "msketch-clipped":
            clipped = [sk.estimate_clipped(sa @ x - sb, plan.loss)
                       for x in report.candidates]
            x_hat = report.candidates[int(np.argmin(clipped))]
        else:
            x_hat = report.x
        achieved = sk.rows
    wall_ms = (time.perf_counter() - start) * 1e3

    objective = plan.loss.total(np.asarray(a @ x_hat).ravel() - np.asarray(b))
    denom = min(ref.objective, objective)
    ratio = 1.0 if denom == 0.0 and objective == 0.0 else (
        math.inf if denom == 0.0 else objective / denom)
    row.update(ratio=float(ratio), wall_time_ms=wall_ms,
               achieved_rows=int(achieved), stalled=stalled,
               objective=float(objective))
    return row


def run_bench(plan: BenchPlan, instance=None, threads: int | None = None) -> BenchResult:
    """Execute every (method, size, rep) cell of the plan.

    instance optionally supplies (A, b); otherwise a Gaussian instance is
    generated from the plan (with outliers injected when configured).
    Cells may run on a thread pool (TUKEYREDUCE_THREADS, default: cpu count);
    per-cell seeds derive from the plan seed, so the results table does not
    depend on scheduling.
    """
    if instance is not None:
        a, b = instance
        a = to_dense(validate_matrix(a))
        b = np.asarray(b, dtype=float)
    else:
        a, b = gen_gaussian(plan.n, plan.d, seed=plan.seed)
        if plan.outlier_fraction > 0:
            b = inject_outliers(b, plan.outlier_fraction,
                                plan.outlier_magnitude,
                                seed=derived_seed(plan.seed, "outliers"))
    if a.shape[0] != b.size:
        raise ParameterError("instance A and b disagree in length")

    cells = [(method, size, rep) for method in plan.methods
             for size in plan.sizes for rep in range(plan.reps)]
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "0")) or (os.cpu_count() or 1)
    threads = max(1, min(threads, len(cells)))

    if threads == 1:
        refs = {rep: _reference(plan, a, b, rep) for rep in range(plan.reps)}
        rows = [_run_cell(plan, a, b, refs, *cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ref_list = list(pool.map(
                lambda rep: _reference(plan, a, b, rep), range(plan.reps)))
            refs = dict(enumerate(ref_list))
            rows = list(pool.map(
                lambda cell: _run_cell(plan, a, b, refs, *cell), cells))

    summary = []
    for method in plan.methods:
        for size in plan.sizes:
            ratios = [r["ratio"] for r in rows
                      if r["method"] == method and r["size"] == size
                      and not math.isnan(r["ratio"])]
            summary.append({"method": method, "size": size,
                            "best_ratio": min(ratios) if ratios else float("nan")})
    metadata = {
        "n": int(a.shape[0]), "d": int(a.shape[1]),
        "reference_objectives": {rep: refs[rep].objective for rep in refs},
        "threads": threads,
    }
    return BenchResult(rows=rows, summary=summary, metadata=metadata)


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(f"{r['method']},{r['size']},{r['rep']},"
                     f"{r['ratio']:.17g},{r['wall_time_ms']:.3f}")
    return "\n".join(lines) + "\n"


def summary_to_csv(summary) -> str:
    lines = ["method,size,best_ratio"]
    for s in summary:
        lines.append(f"{s['method']},{s['size']},{s['best_ratio']:.17g}")
    return "\n".join(lines) + "\n"

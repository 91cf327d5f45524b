"""Solvers for weighted flat-loss regression.

irls_solve runs iteratively reweighted least squares with random restarts:
the first start is the weighted l2 solution, later starts add Gaussian
perturbations whose radius doubles per restart.  Within a restart the
objective never increases: steps are accepted only if they do not increase
it (trying damped fractions of the proposed move first), and when every
residual sits in the flat region -- where the reweighting provides no
gradient -- a single weighted-l1-style step is taken instead, which cannot
increase an objective already at its maximum.

brute_force_solve is an independent grid oracle for d <= 2, used to audit
IRLS on tiny instances: coarse grid over a data-derived box, then repeated
local zooming and a coordinate-descent polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import FlatStartError, DomainError, ParameterError, ShapeError
from .linalg import to_dense, validate_matrix, weighted_least_squares
from .loss import LossSpec

ACCEPT_SLACK = 1e-12
DAMPING = (1.0, 0.5, 0.25, 0.125)


@dataclass
class SolveReport:
    x: np.ndarray
    objective: float
    iterations: int
    restarts: int
    converged: bool
    trace: list[float]
    traces: list[list[float]] = field(default_factory=list)
    candidates: list[np.ndarray] = field(default_factory=list)
    candidate_objectives: list[float] = field(default_factory=list)


def _check_instance(a, b, w):
    mat = validate_matrix(a)
    bv = np.asarray(b, dtype=float)
    n, d = mat.shape
    if bv.shape != (n,):
        raise ShapeError("b must have one entry per row of A")
    if not np.all(np.isfinite(bv)):
        raise DomainError("b contains non-finite values")
    wv = np.ones(n) if w is None else np.asarray(w, dtype=float)
    if wv.shape != (n,):
        raise ShapeError("weights must have one entry per row")
    if not np.all(np.isfinite(wv)) or np.any(wv < 0):
        raise DomainError("weights must be finite and nonnegative")
    if not np.any(wv > 0):
        raise ParameterError("all weights are zero")
    return mat, bv, wv


def _residual(mat, bv, x):
    return np.asarray(mat @ x).ravel() - bv


def _irls_restart(mat, bv, wv, loss: LossSpec, x0, max_iter: int, tol: float):
    x = np.asarray(x0, dtype=float)
    r = _residual(mat, bv, x)
    obj = loss.total(r, wv)
    trace = [obj]
    converged = False
    for _ in range(max_iter):
        surrogate = wv * loss.irls_weight(r)
        flat_step = not np.any(surrogate > 0)
        if flat_step:
            surrogate = wv / np.maximum(np.abs(r), 1e-12)
        proposal = weighted_least_squares(mat, bv, surrogate)
        accepted = None
        for t in DAMPING:
            cand = x + t * (proposal - x)
            r_cand = _residual(mat, bv, cand)
            obj_cand = loss.total(r_cand, wv)
            if obj_cand <= obj + ACCEPT_SLACK:
                accepted = (cand, r_cand, obj_cand)
                break
        if accepted is None:
            break
        moved = float(np.linalg.norm(accepted[0] - x))
        drop = obj - accepted[2]
        x, r, obj = accepted
        trace.append(obj)
        if flat_step:
            if moved <= 1e-12 * (1.0 + float(np.linalg.norm(x))):
                break  # flat-region fixed point
            continue  # no objective-based stop on fallback steps
        if drop <= tol * max(obj, 1e-30):
            converged = True
            break
    active = (np.abs(r) <= loss.tau) & (wv > 0)
    return x, obj, trace, converged, not bool(np.any(active))


def irls_solve(a, b, loss: LossSpec, w=None, restarts: int = 10,
               max_iter: int = 100, tol: float = 1e-9,
               seed: int = 0) -> SolveReport:
    """Best of `restarts` IRLS runs; monotone objective within each run."""
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1")
    mat, bv, wv = _check_instance(a, b, w)
    d = mat.shape[1]
    x_base = weighted_least_squares(mat, bv, wv)

    dense_norms = np.sqrt(np.sum(to_dense(mat) ** 2, axis=1))
    usable = dense_norms[(wv > 0) & (dense_norms > 0)]
    scale_reach = loss.tau / float(np.median(usable)) if usable.size else 0.0
    sigma0 = 0.5 * max(float(np.linalg.norm(x_base)), scale_reach, 1e-6)

    rng = np.random.default_rng(seed)
    report = SolveReport(x=x_base, objective=math.inf, iterations=0,
                         restarts=restarts, converged=False, trace=[])
    all_flat = True
    for k in range(restarts):
        if k == 0:
            x0 = x_base
        else:
            x0 = x_base + sigma0 * 2.0 ** (k - 1) * rng.standard_normal(d)
        x, obj, trace, converged, flat = _irls_restart(
            mat, bv, wv, loss, x0, max_iter, tol)
        report.traces.append(trace)
        report.candidates.append(x)
        report.candidate_objectives.append(obj)
        all_flat = all_flat and flat
        if obj < report.objective:
            report.x = x
            report.objective = obj
            report.trace = trace
            report.iterations = len(trace) - 1
            report.converged = converged
    if all_flat:
        raise FlatStartError(
            "every restart ended with all residuals in the flat region")
    return report


# -- grid oracle ---------------------------------------------------------------

_EVAL_CHUNK = 200_000


def _grid_objective(mat, bv, wv, loss, points):
    """Objective at each row of `points` (k x d), evaluated in chunks."""
    out = np.empty(points.shape[0])
    step = max(1, _EVAL_CHUNK // max(1, mat.shape[0]))
    for start in range(0, points.shape[0], step):
        block = points[start:start + step]
        res = block @ mat.T - bv  # (k, n)
        out[start:start + step] = loss.value(res) @ wv
    return out


def _axis_grid(center, half_width, count, d):
    axes = [np.linspace(center[i] - half_width, center[i] + half_width, count)
            for i in range(d)]
    if d == 1:
        return axes[0][:, None]
    xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def brute_force_solve(a, b, loss: LossSpec, w=None, grid_points: int | None = None,
                      zoom_rounds: int = 6, box_const: float = 2.0) -> SolveReport:
    """Exhaustive grid minimization for d <= 2, then zoom + coordinate descent.

    The search box radius is box_const * ||b||_inf / (smallest nonzero |A|
    entry), which contains every coordinate value at which any single row can
    still transition between its light and flat regimes.
    """
    mat0, bv, wv = _check_instance(a, b, w)
    mat = to_dense(mat0)
    d = mat.shape[1]
    if d not in (1, 2):
        raise ParameterError("the grid oracle supports d <= 2 only")
    nonzero = np.abs(mat)[np.abs(mat) > 0]
    if nonzero.size == 0:
        raise ParameterError("A has no nonzero entries")
    radius = box_const * max(float(np.max(np.abs(bv))), 1e-12) / float(nonzero.min())
    count = grid_points if grid_points is not None else (4001 if d == 1 else 301)
    if count < 3:
        raise ParameterError("grid needs at least 3 points per axis")

    center = np.zeros(d)
    pts = _axis_grid(center, radius, count, d)
    vals = _grid_objective(mat, bv, wv, loss, pts)
    best_idx = int(np.argmin(vals))  # first index wins ties
    best_x = pts[best_idx].copy()
    best_obj = float(vals[best_idx])
    trace = [best_obj]

    cell = 2.0 * radius / (count - 1)
    for _ in range(zoom_rounds):
        pts = _axis_grid(best_x, 2.0 * cell, 41, d)
        vals = _grid_objective(mat, bv, wv, loss, pts)
        idx = int(np.argmin(vals))
        if vals[idx] <= best_obj:
            best_obj = float(vals[idx])
            best_x = pts[idx].copy()
        trace.append(best_obj)
        cell = 4.0 * cell / 40.0

    # full-span axis sweeps catch basins too narrow for the coarse mesh but
    # aligned with a coordinate; strict improvement keeps ties in place
    for _ in range(2):
        for i in range(d):
            line = np.tile(best_x, (4001, 1))
            line[:, i] = np.linspace(-radius, radius, 4001)
            vals = _grid_objective(mat, bv, wv, loss, line)
            idx = int(np.argmin(vals))
            if vals[idx] < best_obj:
                best_obj = float(vals[idx])
                best_x = line[idx].copy()
        trace.append(best_obj)

    span = max(cell * 20.0, 1e-12)
    for _ in range(3):  # coordinate-descent polish
        for i in range(d):
            line = np.tile(best_x, (401, 1))
            line[:, i] = np.linspace(best_x[i] - span, best_x[i] + span, 401)
            vals = _grid_objective(mat, bv, wv, loss, line)
            idx = int(np.argmin(vals))
            if vals[idx] <= best_obj:
                best_obj = float(vals[idx])
                best_x = line[idx].copy()
        trace.append(best_obj)
        span /= 10.0

    return SolveReport(x=best_x, objective=best_obj, iterations=len(trace) - 1,
                       restarts=1, converged=True, trace=trace,
                       traces=[trace], candidates=[best_x],
                       candidate_objectives=[best_obj])


def approx_ratio(a, b, loss: LossSpec, x_hat, x_ref) -> float:
    """Unweighted objective ratio of x_hat against x_ref; 0/0 -> 1, x/0 -> inf."""
    mat, bv, _ = _check_instance(a, b, None)
    num = loss.total(_residual(mat, bv, np.asarray(x_hat, dtype=float)))
    den = loss.total(_residual(mat, bv, np.asarray(x_ref, dtype=float)))
    if den == 0.0:
        return 1.0 if num == 0.0 else math.inf
    return num / den

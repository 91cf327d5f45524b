"""IRLS solver, grid oracle, and ratio bookkeeping."""

import numpy as np
import pytest

from tukeyreduce import (
    FlatStartError,
    LossSpec,
    ParameterError,
    ShapeError,
    approx_ratio,
    brute_force_solve,
    irls_solve,
)

TUKEY1 = LossSpec("tukey", tau=1.0)
CLIP2 = LossSpec("clipped", tau=1.0, p=2.0)


def test_exact_fit_reaches_zero():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((40, 3))
    x_true = rng.standard_normal(3)
    report = irls_solve(a, a @ x_true, TUKEY1, restarts=2, seed=1)
    assert report.objective <= 1e-18
    np.testing.assert_allclose(report.x, x_true, atol=1e-8)
    assert report.converged


def test_outlier_saturates():
    # one far-away point should be written off at cost tau^p
    a = np.ones((4, 1))
    b = np.array([0.0, 0.0, 0.0, 100.0])
    report = irls_solve(a, b, CLIP2, restarts=5, seed=0)
    assert abs(report.x[0]) <= 1e-6
    assert report.objective == pytest.approx(1.0, abs=1e-8)
    oracle = brute_force_solve(a, b, CLIP2)
    assert report.objective <= oracle.objective + 1e-4


def test_traces_monotone_nonincreasing():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((60, 4))
    b = a @ rng.standard_normal(4) + 0.2 * rng.standard_normal(60)
    b[::7] += 25.0
    for loss in (TUKEY1, CLIP2):
        report = irls_solve(a, b, loss, restarts=6, seed=3)
        for trace in report.traces:
            diffs = np.diff(np.asarray(trace))
            assert np.all(diffs <= 1e-9)


def test_report_objective_consistent():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((50, 3))
    b = rng.standard_normal(50)
    w = rng.uniform(0.5, 3.0, size=50)
    report = irls_solve(a, b, TUKEY1, w=w, restarts=3, seed=4)
    recomputed = TUKEY1.total(b - a @ report.x, w)
    assert report.objective == pytest.approx(recomputed, abs=1e-10)
    assert len(report.candidates) == len(report.candidate_objectives)
    assert min(report.candidate_objectives) == pytest.approx(report.objective)


def test_weighted_matches_duplicated_rows():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((30, 3))
    b = a @ np.array([1.0, -2.0, 0.5]) + rng.standard_normal(30)
    dup_a = np.vstack([a, a[5:6]])
    dup_b = np.append(b, b[5])
    w = np.ones(30)
    w[5] = 2.0
    r_dup = irls_solve(dup_a, dup_b, TUKEY1, restarts=4, seed=3)
    r_w = irls_solve(a, b, TUKEY1, w=w, restarts=4, seed=3)
    assert len(r_dup.trace) == len(r_w.trace)
    np.testing.assert_allclose(r_dup.trace, r_w.trace, atol=1e-10)


def test_flat_start_error():
    # both residuals sit far beyond tau whatever x is reachable, so every
    # restart lands in the flat region and the solver reports it
    a = np.array([[1.0], [1.0]])
    b = np.array([1000.0, -1000.0])
    with pytest.raises(FlatStartError):
        irls_solve(a, b, LossSpec("tukey", tau=1e-3), restarts=3, seed=0)


def test_solver_validation():
    a = np.ones((4, 1))
    b = np.zeros(4)
    with pytest.raises(ParameterError):
        irls_solve(a, b, TUKEY1, restarts=0)
    with pytest.raises(ParameterError):
        irls_solve(a, b, TUKEY1, max_iter=0)
    with pytest.raises(ShapeError):
        irls_solve(a, b[:-1], TUKEY1)
    with pytest.raises(ParameterError):
        irls_solve(a, b, TUKEY1, w=np.zeros(4))


def test_grid_oracle_exact_instance():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((25, 2))
    x0 = np.array([0.7, -1.2])
    report = brute_force_solve(a, a @ x0, TUKEY1)
    assert report.objective <= 1e-8
    np.testing.assert_allclose(report.x, x0, atol=1e-3)


def test_grid_oracle_dimension_limit():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((10, 3))
    with pytest.raises(ParameterError):
        brute_force_solve(a, np.zeros(10), TUKEY1)


def test_grid_oracle_weighted_outlier():
    # weighting the outlier row down restores the clean optimum
    a = np.ones((4, 1))
    b = np.array([2.0, 2.0, 2.0, 50.0])
    w = np.array([1.0, 1.0, 1.0, 1e-9])
    report = brute_force_solve(a, b, CLIP2, w=w)
    assert report.x[0] == pytest.approx(2.0, abs=1e-3)


def test_approx_ratio_pinned():
    a = np.array([[1.0], [0.0]])
    b = np.array([0.0, 5.0])
    # the zero row contributes a saturated residual whatever x is, so the
    # optimum is tau^p = 1 at x = 0; x = 3 saturates one extra residual
    assert approx_ratio(a, b, CLIP2, np.array([3.0]), np.array([0.0])) == \
        pytest.approx(2.0, abs=1e-12)
    assert approx_ratio(a, b, CLIP2, np.array([0.0]), np.array([0.0])) == 1.0
    z = np.zeros((2, 1))
    assert approx_ratio(z, np.zeros(2), CLIP2, np.array([1.0]),
                        np.array([2.0])) == 1.0  # both objectives vanish

"""Loss family: evaluation, weighted totals, IRLS weights, flatness."""

import numpy as np
import pytest

from tukeyreduce import CLIPPED, TUKEY, DomainError, LossSpec, ParameterError, ShapeError

TUKEY1 = LossSpec(TUKEY, tau=1.0)
CLIP12 = LossSpec(CLIPPED, tau=1.0, p=2.0)


def test_value_pinned_points():
    assert TUKEY1.value(0.0) == 0.0
    assert TUKEY1.value(2.0) == pytest.approx(1.0 / 6.0, abs=1e-15)
    # (1/6)(1 - 0.75^3) evaluated by hand
    assert TUKEY1.value(0.5) == pytest.approx(0.09635416666666666, abs=1e-15)
    assert LossSpec(CLIPPED, tau=2.0, p=1.0).value(-3.0) == pytest.approx(2.0)


def test_value_scale_is_multiplicative():
    scaled = LossSpec(TUKEY, tau=1.0, scale=7.0)
    for a in (0.1, 0.5, 0.99, 3.0):
        assert scaled.value(a) == pytest.approx(7.0 * TUKEY1.value(a), rel=1e-14)


def test_value_vectorized_matches_scalar():
    a = np.linspace(-3, 3, 41)
    vals = TUKEY1.value(a)
    for ai, vi in zip(a, vals):
        assert vi == pytest.approx(TUKEY1.value(float(ai)), abs=1e-15)


def test_value_rejects_non_finite():
    with pytest.raises(DomainError):
        TUKEY1.value(np.nan)
    with pytest.raises(DomainError):
        TUKEY1.value(np.array([0.0, np.inf]))


def test_spec_validation():
    with pytest.raises(ParameterError):
        LossSpec(TUKEY, tau=0.0)
    with pytest.raises(ParameterError):
        LossSpec(CLIPPED, tau=1.0, p=0.5)
    with pytest.raises(ParameterError):
        LossSpec(TUKEY, tau=1.0, scale=-1.0)
    with pytest.raises(ParameterError):
        LossSpec("huber", tau=1.0)


def test_flat_region_constant():
    rng = np.random.default_rng(0)
    big = 1.0 + rng.uniform(0.0, 50.0, size=200)
    np.testing.assert_allclose(TUKEY1.value(big), TUKEY1.flat_value, rtol=0, atol=0)
    clip = LossSpec(CLIPPED, tau=2.0, p=1.5)
    np.testing.assert_allclose(clip.value(2.0 * big), clip.flat_value)
    assert TUKEY1.flat_value == pytest.approx(1.0 / 6.0)
    assert clip.flat_value == pytest.approx(2.0 ** 1.5)


def test_total_pinned_examples():
    assert TUKEY1.total(np.zeros(5)) == 0.0
    # hand sum of clipped squares: 0.25 + 2 * 1
    assert CLIP12.total(np.array([0.5, 3.0]), np.array([1.0, 2.0])) == pytest.approx(2.25)
    assert TUKEY1.total(np.array([2.0, 2.0, 2.0])) == pytest.approx(0.5)


def test_total_zero_iff_supported_entries_zero():
    y = np.array([0.0, 5.0, 0.0])
    w = np.array([1.0, 0.0, 2.0])
    assert TUKEY1.total(y, w) == 0.0
    assert TUKEY1.total(np.array([0.0, 1e-3, 0.0]), w) == 0.0  # w masks entry 1
    assert TUKEY1.total(np.array([1e-3, 0.0, 0.0]), w) > 0.0


def test_total_shape_mismatch():
    with pytest.raises(ShapeError):
        TUKEY1.total(np.zeros(3), np.zeros(4))


def test_irls_weight_pinned():
    assert TUKEY1.irls_weight(1.0) == 0.0
    assert TUKEY1.irls_weight(5.0) == 0.0
    assert CLIP12.irls_weight(0.5) == pytest.approx(1.0)
    # limit at 0 is finite and maximal over the light region
    w0 = TUKEY1.irls_weight(0.0)
    assert np.isfinite(w0) and w0 > 0
    r = np.linspace(1e-6, 0.999, 500)
    assert np.all(TUKEY1.irls_weight(r) <= w0 + 1e-12)


def test_irls_weight_nonincreasing_in_abs_r():
    rng = np.random.default_rng(1)
    for spec in (TUKEY1, CLIP12, LossSpec(CLIPPED, tau=2.0, p=1.0)):
        r = np.sort(rng.uniform(0, 3.0, size=300))
        w = spec.irls_weight(r)
        assert np.all(np.diff(w) <= 1e-12)
        np.testing.assert_allclose(spec.irls_weight(-r), w)


def test_split_heavy_light():
    heavy, light = TUKEY1.split_heavy_light(np.array([0.5, -2.0, 1.0]))
    np.testing.assert_array_equal(heavy, [1])
    np.testing.assert_array_equal(light, [0, 2])  # boundary |y| = tau stays light
    heavy, light = TUKEY1.split_heavy_light(np.zeros(4))
    assert heavy.size == 0 and light.size == 4
    heavy, light = TUKEY1.split_heavy_light(np.full(4, 9.0))
    assert heavy.size == 4 and light.size == 0


def test_symmetry_and_monotonicity():
    rng = np.random.default_rng(2)
    for spec in (TUKEY1, CLIP12, LossSpec(CLIPPED, tau=0.5, p=3.0)):
        a = rng.uniform(-4, 4, size=2000)
        np.testing.assert_allclose(spec.value(-a), spec.value(a), atol=1e-15)
        lo = rng.uniform(0, 4, size=2000)
        hi = lo * rng.uniform(1.0, 3.0, size=2000)
        assert np.all(spec.value(hi) >= spec.value(lo) - 1e-15)


def test_growth_bound():
    # value(a)/value(a') never exceeds (|a|/|a'|)^p for |a| >= |a'| > 0
    rng = np.random.default_rng(3)
    for spec in (TUKEY1, LossSpec(TUKEY, tau=3.0), CLIP12):
        lo = rng.uniform(1e-3, 4, size=2000)
        hi = lo * rng.uniform(1.0, 5.0, size=2000)
        ratio = spec.value(hi) / spec.value(lo)
        assert np.all(ratio <= (hi / lo) ** spec.p * (1 + 1e-12))


def test_sandwich_bounds():
    lo, hi = TUKEY1.sandwich_bounds()
    assert 0 < lo <= hi
    # bisquare: M(a)/a^2 spans [1/6, 1/2] on (0, tau]
    assert lo == pytest.approx(1.0 / 6.0, rel=1e-6)
    assert hi == pytest.approx(0.5, rel=1e-6)
    # clamped constants: lower in (0, 1], upper in [1, inf)
    assert TUKEY1.power_lower == pytest.approx(1.0 / 6.0, rel=1e-6)
    assert TUKEY1.power_upper == 1.0
    assert TUKEY1.sandwich_ratio == pytest.approx(6.0, rel=1e-5)
    clo, chi = CLIP12.sandwich_bounds()
    assert clo == pytest.approx(1.0) and chi == pytest.approx(1.0)
    assert CLIP12.sandwich_ratio == pytest.approx(1.0)
    grid = np.linspace(1e-4, 1.0, 5000)
    vals = TUKEY1.value(grid) / grid ** 2
    assert np.all(vals >= lo - 1e-9) and np.all(vals <= hi + 1e-9)


def test_small_perturbation_changes_value_proportionally():
    # |value(a+e) / value(a) - 1| <= 10 * eps for |e| <= eps * |a|, p <= 2
    rng = np.random.default_rng(4)
    eps = 1e-3
    for spec in (TUKEY1, CLIP12, LossSpec(CLIPPED, tau=2.0, p=1.0)):
        a = rng.uniform(-3, 3, size=10000)
        a = a[np.abs(a) > 1e-6]
        e = rng.uniform(-1, 1, size=a.size) * eps * np.abs(a)
        base = spec.value(a)
        mask = base > 0
        drift = np.abs(spec.value(a[mask] + e[mask]) / base[mask] - 1.0)
        assert drift.max() <= 10 * eps

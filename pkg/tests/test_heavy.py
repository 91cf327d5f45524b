"""Heavy-row finders and derived seeding."""

import numpy as np
import pytest

from tukeyreduce import (
    HeavyConfig,
    ParameterError,
    derived_seed,
    heavy_rows_iterative,
    heavy_rows_partitioned,
    lewis_weights,
    partitioned_round_count,
)
from tukeyreduce import heavy as heavy_mod


def spike_matrix(n=50, k=100.0):
    a = np.ones((n, 1))
    a[0, 0] = k
    return a


def test_derived_seed_stable_and_bounded():
    s = derived_seed("alpha", 3, 1.5)
    assert s == derived_seed("alpha", 3, 1.5)
    assert 0 <= s < 2**63
    assert s != derived_seed("alpha", 3, 1.6)
    assert derived_seed() == derived_seed()


def test_iterative_finds_planted_spike():
    # leverage of the big row is 100^2 / (100^2 + 49) ~ 0.995 >= 1/(2*2)
    cfg = HeavyConfig(p=2.0, tau=1.0, alpha=2.0)
    picked = heavy_rows_iterative(spike_matrix(), cfg)
    assert 0 in picked
    # the remaining rows are interchangeable and individually negligible
    assert picked.size <= 2


def test_iterative_uniform_rows_selects_nothing():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((400, 3))
    cfg = HeavyConfig(p=2.0, tau=1.0, alpha=2.0)
    assert heavy_rows_iterative(a, cfg).size == 0


def test_iterative_round_count(monkeypatch):
    calls = []
    real = heavy_mod.lewis_weights

    def counting(*args, **kwargs):
        calls.append(1)
        return real(*args, **kwargs)

    monkeypatch.setattr(heavy_mod, "lewis_weights", counting)
    a = np.random.default_rng(1).standard_normal((30, 2))
    for alpha, rounds in ((1.0, 1), (2.0, 2), (2.5, 3), (4.0, 4)):
        calls.clear()
        heavy_rows_iterative(a, HeavyConfig(p=2.0, tau=1.0, alpha=alpha))
        assert len(calls) == rounds


def test_iterative_threshold_matches_direct_weights():
    # single round at alpha = 1: selection is exactly {i : u_i >= 1/2}
    rng = np.random.default_rng(2)
    a = rng.standard_normal((40, 3))
    a[5] *= 50.0
    cfg = HeavyConfig(p=2.0, tau=1.0, alpha=1.0)
    picked = heavy_rows_iterative(a, cfg)
    u = lewis_weights(a, 2.0).weights
    np.testing.assert_array_equal(picked, np.flatnonzero(u >= 0.5))


def test_partitioned_round_count_formula():
    cfg = HeavyConfig(p=2.0, tau=1.0, alpha=2.0, delta=0.01)
    d = 4
    bound = cfg.size_const * d ** max(cfg.p / 2.0, 1.0) * cfg.alpha**2
    expect = int(np.ceil(np.log2(bound / cfg.delta)))
    assert partitioned_round_count(d, cfg) == expect
    assert partitioned_round_count(1, HeavyConfig(p=1.0, tau=1.0, alpha=1.0,
                                                  delta=0.5)) >= 1


def test_partitioned_finds_planted_spike():
    a = spike_matrix()
    hits = 0
    for k in range(20):
        cfg = HeavyConfig(p=2.0, tau=1.0, alpha=2.0, delta=0.01,
                          seed=derived_seed("spike", k))
        picked = heavy_rows_partitioned(a, cfg)
        hits += int(0 in picked)
    assert hits == 20


def test_partitioned_single_group_matches_global_threshold():
    # alpha = 1 puts every row in one group each round, so one round
    # reduces to thresholding global weights at 1/6
    rng = np.random.default_rng(3)
    a = rng.standard_normal((60, 2))
    a[7] *= 40.0
    cfg = HeavyConfig(p=2.0, tau=1.0, alpha=1.0, delta=0.4, seed=0)
    picked = heavy_rows_partitioned(a, cfg)
    u = lewis_weights(a, 2.0).weights
    expected = np.flatnonzero(u >= 1.0 / 6.0)
    np.testing.assert_array_equal(picked, expected)


def test_partitioned_output_sorted_unique_in_range():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((100, 3))
    a[::25] *= 30.0
    cfg = HeavyConfig(p=1.0, tau=1.0, alpha=2.0, seed=1)
    picked = heavy_rows_partitioned(a, cfg)
    assert np.all(np.diff(picked) > 0)
    assert picked.size == 0 or (picked.min() >= 0 and picked.max() < 100)


def test_config_validation():
    with pytest.raises(ParameterError):
        HeavyConfig(p=2.0, tau=1.0, alpha=0.5)
    with pytest.raises(ParameterError):
        HeavyConfig(p=2.0, tau=0.0, alpha=1.0)
    with pytest.raises(ParameterError):
        HeavyConfig(p=0.5, tau=1.0, alpha=1.0)
    with pytest.raises(ParameterError):
        HeavyConfig(p=2.0, tau=1.0, alpha=1.0, delta=0.0)
    with pytest.raises(ParameterError):
        heavy_rows_partitioned(np.ones((3, 1)),
                               HeavyConfig(p=2.0, tau=1.0, alpha=5.0))

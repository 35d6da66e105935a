import warnings

import numpy as np
import pytest

from ginifield import (
    ConfigError,
    GpiConfig,
    ZeroNormalizer,
    a_statistic,
    fgt_direct,
    gini_point,
    gpi_point,
    kakwani_direct,
    make_distribution,
    pairwise_gini,
    sen_direct,
)


def dist(*x):
    return make_distribution(x)


def test_gini_hand_values():
    assert gini_point(dist(1, 3)).value == 0.25
    assert gini_point(dist(4.2, 4.2, 4.2, 4.2)).value == 0.0
    assert gini_point(dist(1 / 3, 1 / 3, 1 / 3)).value == 0.0


def test_gini_matches_pairwise_on_random_samples():
    rng = np.random.default_rng(10)
    for n in (2, 3, 17, 200):
        x = rng.lognormal(size=n)
        assert gini_point(make_distribution(x)).value == pytest.approx(pairwise_gini(x), rel=1e-12)


def test_gini_scale_invariance():
    rng = np.random.default_rng(11)
    x = rng.exponential(size=101)
    g = gini_point(make_distribution(x)).value
    assert gini_point(make_distribution(4 * x)).value == g
    assert gini_point(make_distribution(0.37 * x)).value == pytest.approx(g, rel=1e-13)


def test_gini_replication():
    # the mean-difference form is invariant when every income is repeated k times,
    # so 2A/mu - 1 (which drops the -1/n term) moves by exactly 1/n - 1/(kn)
    x = np.array([0.5, 1.0, 2.5, 7.0, 3.3])
    n = x.size
    d = make_distribution(x)
    g = gini_point(d).value
    raw = 2 * a_statistic(d) / d.mean - 1
    for k in (2, 3, 5):
        dk = make_distribution(np.repeat(x, k))
        assert gini_point(dk).value == pytest.approx(g, abs=1e-12)
        raw_k = 2 * a_statistic(dk) / dk.mean - 1
        assert raw - raw_k == pytest.approx(1 / n - 1 / (k * n), abs=1e-12)


def test_a_statistic():
    assert a_statistic(dist(1, 3)) == 1.75
    assert a_statistic(dist(2.5)) == 2.5
    assert a_statistic(dist(*[2.0] * 6)) == pytest.approx(2.0 * 7 / 12, abs=1e-15)
    assert a_statistic(dist(1, 3), midrank=True) == pytest.approx(0.5 * (0.25 + 0.75 * 3))


def test_gini_from_a_statistic():
    d = dist(0.2, 0.9, 1.7, 4.0)
    est = gini_point(d)
    assert est.value == pytest.approx(2 * est.a_statistic / est.mean - 1 - 1 / d.n, abs=1e-14)


def test_fgt_presets_hand():
    d = dist(0.5, 1.5, 2.0)
    e0 = gpi_point(d, GpiConfig.fgt(1, 0))
    assert e0.value == pytest.approx(1 / 3, abs=1e-15) and e0.poor_count == 1
    assert gpi_point(d, GpiConfig.fgt(1, 1)).value == pytest.approx(1 / 6, abs=1e-15)
    assert fgt_direct(d, 1, 0) == pytest.approx(1 / 3, abs=1e-15)


def test_sen_hand():
    assert sen_direct(dist(0.2, 0.4, 2.0), 1) == pytest.approx(2 / 9 * (2 * 0.8 + 0.6), abs=1e-15)
    assert sen_direct(dist(2, 3), 1) == 0


def test_no_poor_gives_zero():
    d = dist(1, 2, 3)
    for cfg in (GpiConfig.fgt(1, 2), GpiConfig.sen(1), GpiConfig.kakwani(1, 2)):
        e = gpi_point(d, cfg)
        assert e.value == 0 and e.poor_count == 0


def test_boundary_income_is_not_poor():
    e = gpi_point(dist(1.0, 2.0), GpiConfig.fgt(1.0, 0))
    assert e.poor_count == 0


def brute_sen(x, z):
    # Sen index from its rank-weighted definition, one poor person at a time
    x = sorted(x)
    poor = [v for v in x if v < z]
    q, n = len(poor), len(x)
    if q == 0:
        return 0.0
    total = sum((q + 1 - (i + 1)) * (z - v) / z for i, v in enumerate(poor))
    return 2.0 * total / (n * (q + 1))


def test_presets_match_direct_forms():
    rng = np.random.default_rng(12)
    for _ in range(50):
        n = int(rng.integers(1, 60))
        x = rng.lognormal(size=n)
        z = float(np.quantile(x, rng.random())) + 1e-3
        d = make_distribution(x)
        for a in (0, 1, 2, 0.5):
            assert gpi_point(d, GpiConfig.fgt(z, a)).value == pytest.approx(fgt_direct(d, z, a), abs=1e-12)
        assert gpi_point(d, GpiConfig.sen(z)).value == pytest.approx(sen_direct(d, z), abs=1e-12)
        assert sen_direct(d, z) == pytest.approx(brute_sen(x, z), abs=1e-12)
        for k in (0.5, 1, 3):
            assert gpi_point(d, GpiConfig.kakwani(z, k)).value == pytest.approx(kakwani_direct(d, z, k), abs=1e-12)


def test_kakwani_one_is_sen():
    d = dist(0.1, 0.3, 0.35, 0.9, 2.0)
    assert kakwani_direct(d, 1, 1) == pytest.approx(sen_direct(d, 1), abs=1e-15)


def test_fgt_monotone_in_poor_income():
    rng = np.random.default_rng(13)
    x = rng.exponential(size=30)
    z = 0.8
    i = int(np.argmin(x))
    for a in (1, 2):
        base = gpi_point(make_distribution(x), GpiConfig.fgt(z, a)).value
        y = x.copy()
        y[i] *= 0.5
        assert gpi_point(make_distribution(y), GpiConfig.fgt(z, a)).value >= base


def test_config_validation():
    with pytest.raises(ConfigError):
        GpiConfig.fgt(0, 1)
    with pytest.raises(ConfigError):
        GpiConfig.fgt(-1, 1)
    with pytest.raises(ConfigError):
        GpiConfig.kakwani(1, 0)
    with pytest.raises(ConfigError):
        GpiConfig(1.0, weight=np.ones_like, deprivation=lambda y: np.where(np.asarray(y) == 0, np.nan, y), scale=lambda q, n, z: n)


def test_custom_config_warns_on_nonzero_d0():
    with pytest.warns(UserWarning):
        GpiConfig(1.0, weight=np.ones_like, deprivation=lambda y: np.asarray(y) + 1, scale=lambda q, n, z: n)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        GpiConfig.fgt(1.0, 0)


def test_zero_normalizer():
    cfg = GpiConfig(1.0, weight=np.zeros_like, deprivation=lambda y: np.asarray(y), scale=lambda q, n, z: n)
    with pytest.raises(ZeroNormalizer):
        gpi_point(dist(0.5, 2), cfg)


def test_fgt_residuals():
    cfg = GpiConfig.fgt(2.0, 1)
    assert cfg.has_residuals
    assert cfg.residual_g(np.array([1.0, 2.0, 3.0])).tolist() == [0.5, 0.0, 0.0]
    assert not GpiConfig.sen(2.0).has_residuals

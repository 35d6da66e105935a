import numpy as np
import pytest
from scipy import integrate

from ginifield import (
    EmptySample,
    Grid,
    LengthMismatch,
    NonPositiveValue,
    OutOfRange,
    ecdf,
    empirical_copula,
    kernel_rect_integral,
    make_distribution,
    make_paired,
    quantile,
)


def test_make_distribution_sorts_and_averages():
    d = make_distribution([3, 1, 2])
    assert list(d.values_sorted) == [1, 2, 3]
    assert d.mean == 2 and d.n == 3


def test_singleton():
    d = make_distribution([5])
    assert d.n == 1 and d.mean == 5
    assert quantile(make_distribution([7]), 0.3) == 7
    assert quantile(make_distribution([7]), 1.0) == 7


def test_rejects_nonpositive_with_index():
    with pytest.raises(NonPositiveValue) as exc:
        make_distribution([1, 0, 2])
    assert exc.value.index == 1


def test_rejects_empty_and_nan():
    with pytest.raises(EmptySample):
        make_distribution([])
    with pytest.raises(NonPositiveValue):
        make_distribution([1.0, np.nan])


def test_values_are_read_only():
    d = make_distribution([2, 1])
    with pytest.raises(ValueError):
        d.values_sorted[0] = 5


def test_ecdf_examples():
    d = make_distribution([1, 2, 3])
    assert ecdf(d, 2) == pytest.approx(2 / 3, abs=0)
    assert ecdf(d, 0.5) == 0
    assert ecdf(make_distribution([1, 1, 3]), 1) == pytest.approx(2 / 3, abs=0)


def test_quantile_left_continuous():
    d = make_distribution([1, 3])
    assert quantile(d, 0.5) == 1
    assert quantile(d, 0.500001) == 3
    with pytest.raises(OutOfRange):
        quantile(d, 0.0)
    with pytest.raises(OutOfRange):
        quantile(d, 1.2)


def test_galois_connection():
    rng = np.random.default_rng(0)
    d = make_distribution(np.round(rng.exponential(size=57), 1) + 0.1)
    s = np.linspace(0.001, 1, 997)
    assert np.all(ecdf(d, quantile(d, s)) >= s - 1e-15)
    x = d.values_sorted
    assert np.all(quantile(d, ecdf(d, x)) <= x)


def test_copula_two_point_examples():
    c = empirical_copula(make_paired([1, 2], [1, 2]))
    assert c.pseudo_obs.tolist() == [[0.5, 0.5], [1.0, 1.0]]
    assert c.evaluate(0.5, 0.5) == 0.5
    c = empirical_copula(make_paired([1, 2], [2, 1]))
    assert c.evaluate(0.5, 0.5) == 0.0


def test_copula_ties_use_maximal_rank():
    c = empirical_copula(make_paired([1, 1, 2], [5, 4, 4]))
    assert c.pseudo_obs[:, 0].tolist() == pytest.approx([2 / 3, 2 / 3, 1])
    assert c.pseudo_obs[:, 1].tolist() == pytest.approx([1, 2 / 3, 2 / 3])


def test_copula_margins_and_bounds():
    rng = np.random.default_rng(1)
    n = 2000
    c = empirical_copula(make_paired(rng.random(n) + 0.01, rng.random(n) + 0.01))
    s = np.linspace(0, 1, 201)
    assert np.max(np.abs(c.evaluate(np.ones_like(s), s) - s)) <= 1 / n + 1e-12
    assert np.max(np.abs(c.evaluate(s, np.ones_like(s)) - s)) <= 1 / n + 1e-12
    assert np.all(c.evaluate(np.zeros_like(s), s) == 0)
    g = np.linspace(0.02, 1, 50)
    grid = c.evaluate_grid(g, g)
    assert np.max(np.abs(grid - np.outer(g, g))) < 0.06
    assert np.all(np.diff(grid, axis=0) >= 0) and np.all(np.diff(grid, axis=1) >= 0)


def test_evaluate_grid_matches_pointwise():
    rng = np.random.default_rng(2)
    c = empirical_copula(make_paired(rng.lognormal(size=40), rng.lognormal(size=40)))
    g = Grid(16).nodes
    uu, vv = np.meshgrid(g, g, indexing="ij")
    assert np.array_equal(c.evaluate_grid(g, g), c.evaluate(uu, vv))


def test_checkerboard_cross_cov_of_ranks():
    # Cov of cell indices equals the sample covariance of ordinal ranks
    rng = np.random.default_rng(3)
    x, y = rng.random(30) + 1, rng.random(30) + 1
    c = empirical_copula(make_paired(x, y))
    a = np.arange(30, dtype=float)
    r1, r2 = np.argsort(np.argsort(x)), np.argsort(np.argsort(y))
    assert c.cross_cov(a, a) == pytest.approx(np.mean((r1 - r1.mean()) * (r2 - r2.mean())), abs=1e-12)


def test_make_paired_checks():
    with pytest.raises(LengthMismatch):
        make_paired([1, 2], [1])
    with pytest.raises(NonPositiveValue):
        make_paired([1, 2], [1, -1])
    p = make_paired(np.array([[1, 2], [3, 4]]))
    assert p.swapped().x1.tolist() == [2, 4]


def test_kernel_rect_examples():
    assert kernel_rect_integral(0, 1, 0, 1) == pytest.approx(1 / 12, abs=1e-15)
    assert kernel_rect_integral(0, 0.5, 0.5, 1) == pytest.approx(0.015625, abs=1e-15)
    assert kernel_rect_integral(0.3, 0.3, 0.1, 0.9) == 0


def test_kernel_rect_against_quadrature():
    # integrate in t analytically-free but split at the diagonal so quad sees smooth pieces
    def inner(s, c, d):
        pieces = [(c, min(d, s)), (max(c, s), d)]
        return sum(integrate.quad(lambda t: min(s, t) - s * t, lo, hi)[0] for lo, hi in pieces if hi > lo)

    for a, b, c, d in [(0.1, 0.7, 0.2, 0.9), (0.0, 0.3, 0.6, 1.0), (0.25, 0.5, 0.25, 0.5)]:
        knots = sorted({a, b} | {v for v in (c, d) if a < v < b})
        ref = sum(integrate.quad(inner, lo, hi, args=(c, d), epsabs=1e-14)[0] for lo, hi in zip(knots, knots[1:]))
        assert kernel_rect_integral(a, b, c, d) == pytest.approx(ref, abs=1e-12)


def test_kernel_rect_additive_and_symmetric():
    rng = np.random.default_rng(4)
    for _ in range(200):
        a, m, b = np.sort(rng.random(3))
        c, d = np.sort(rng.random(2))
        whole = kernel_rect_integral(a, b, c, d)
        assert whole == pytest.approx(kernel_rect_integral(a, m, c, d) + kernel_rect_integral(m, b, c, d), abs=1e-13)
        assert whole == kernel_rect_integral(c, d, a, b)


def test_kernel_rect_domain():
    with pytest.raises(OutOfRange):
        kernel_rect_integral(-0.1, 0.5, 0, 1)


def test_grid_nodes():
    assert Grid(4).nodes.tolist() == [0.125, 0.375, 0.625, 0.875]
    with pytest.raises(OutOfRange):
        Grid(0)

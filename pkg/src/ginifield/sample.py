"""Sample containers, empirical distribution functions and the empirical copula.

Everything here is immutable after construction. Quantiles follow the
left-continuous generalized inverse ``inf{x : F_n(x) >= s}``, i.e. the
order statistic ``X_{ceil(ns), n}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    EmptySample,
    LengthMismatch,
    NonPositiveValue,
    OutOfRange,
    SampleTooSmall,
)

__all__ = [
    "EmpiricalDistribution",
    "PairedSample",
    "EmpiricalCopula",
    "IndependenceCopula",
    "Grid",
    "make_distribution",
    "make_paired",
    "ecdf",
    "quantile",
    "empirical_copula",
    "kernel_rect_integral",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted, strictly positive income sample.

    Attributes
    ----------
    values_sorted : ndarray
        Order statistics ``X_{1,n} <= ... <= X_{n,n}`` (read-only).
    n : int
    mean : float
    """

    values_sorted: np.ndarray
    n: int
    mean: float

    def ecdf(self, x):
        return ecdf(self, x)

    def quantile(self, s):
        return quantile(self, s)

    @property
    def is_constant(self) -> bool:
        return bool(self.values_sorted[0] == self.values_sorted[-1])


def make_distribution(values: Sequence[float]) -> EmpiricalDistribution:
    """Validate and sort an income sample.

    Raises
    ------
    EmptySample
        If ``values`` is empty.
    NonPositiveValue
        On the first entry that is not strictly positive (or not finite);
        ``err.index`` is its position in the input.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise EmptySample("income sample is empty")
    bad = ~(np.isfinite(x) & (x > 0))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NonPositiveValue(i, float(x[i]))
    xs = np.sort(x, kind="stable")
    return EmpiricalDistribution(_frozen(xs), int(xs.size), float(np.mean(xs)))


def ecdf(dist: EmpiricalDistribution, x):
    """Proportion of observations ``<= x``; vectorized over ``x``."""
    counts = np.searchsorted(dist.values_sorted, x, side="right")
    out = counts / dist.n
    return float(out) if np.ndim(out) == 0 else out


def quantile(dist: EmpiricalDistribution, s):
    """Left-continuous generalized inverse of the ECDF at ``s`` in (0, 1]."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(~(s_arr > 0)) or np.any(s_arr > 1):
        raise OutOfRange("quantile level must lie in (0, 1]")
    # ceil(n*s) with a guard against n*s landing a hair above an integer
    ns = s_arr * dist.n
    k = np.ceil(ns - 1e-12 * np.maximum(ns, 1.0)).astype(int)
    k = np.clip(k, 1, dist.n)
    out = dist.values_sorted[k - 1]
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PairedSample:
    """Two-period incomes observed on the same ``n`` households."""

    x1: np.ndarray
    x2: np.ndarray
    n: int

    @property
    def rows(self) -> np.ndarray:
        return np.column_stack([self.x1, self.x2])

    def margin(self, j: int) -> EmpiricalDistribution:
        if j not in (1, 2):
            raise OutOfRange("margin index must be 1 or 2")
        return make_distribution(self.x1 if j == 1 else self.x2)

    def swapped(self) -> "PairedSample":
        return PairedSample(self.x2, self.x1, self.n)


def make_paired(x1: Sequence[float], x2: Sequence[float] | None = None) -> PairedSample:
    """Build a :class:`PairedSample` from two columns or from an ``(n, 2)`` array."""
    if x2 is None:
        rows = np.asarray(x1, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 2:
            raise LengthMismatch("expected an (n, 2) array of income pairs")
        a, b = rows[:, 0].copy(), rows[:, 1].copy()
    else:
        a = np.asarray(x1, dtype=float).ravel().copy()
        b = np.asarray(x2, dtype=float).ravel().copy()
        if a.size != b.size:
            raise LengthMismatch(f"columns have {a.size} and {b.size} rows")
    if a.size < 2:
        raise SampleTooSmall("paired sample needs at least 2 rows")
    for col in (a, b):
        bad = ~(np.isfinite(col) & (col > 0))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NonPositiveValue(i, float(col[i]), what="row")
    return PairedSample(_frozen(a), _frozen(b), int(a.size))


def _ordinal_ranks(x: np.ndarray) -> np.ndarray:
    """0-based position of each entry in a stable sort."""
    r = np.empty(x.size, dtype=np.intp)
    r[np.argsort(x, kind="stable")] = np.arange(x.size)
    return r


@dataclass(frozen=True)
class EmpiricalCopula:
    """Rank-based copula estimate.

    ``pseudo_obs`` holds ``(F_{n,1}(x1_i), F_{n,2}(x2_i))`` (maximal rank for
    ties, so values live in ``(0, 1]``) and :meth:`evaluate` is the usual
    step-function empirical copula.

    The variance engine integrates against the checkerboard extension of the
    same ranks: row ``i`` spreads mass ``1/n`` uniformly over the cell
    ``((r1_i - 1)/n, r1_i/n] x ((r2_i - 1)/n, r2_i/n]`` with ordinal ranks, which
    has exactly uniform margins and agrees with :meth:`evaluate` on the lattice
    ``{k/n}`` for tie-free data.
    """

    pseudo_obs: np.ndarray
    n: int
    ranks1: np.ndarray = field(repr=False)
    ranks2: np.ndarray = field(repr=False)

    def evaluate(self, u, v):
        u_arr = np.asarray(u, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        pu = self.pseudo_obs[:, 0]
        pv = self.pseudo_obs[:, 1]
        out = np.mean(
            (pu[:, None] <= u_arr.ravel()[None, :]) & (pv[:, None] <= v_arr.ravel()[None, :]),
            axis=0,
        )
        out = out.reshape(np.broadcast(u_arr, v_arr).shape)
        return float(out) if out.ndim == 0 else out

    def evaluate_grid(self, s: np.ndarray, t: np.ndarray) -> np.ndarray:
        """``C_n(s_k, t_l)`` on a tensor grid via a 2-D cumulative count."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        iu = np.searchsorted(s, self.pseudo_obs[:, 0], side="left")
        iv = np.searchsorted(t, self.pseudo_obs[:, 1], side="left")
        counts = np.zeros((s.size + 1, t.size + 1))
        np.add.at(counts, (iu, iv), 1.0)
        cum = counts.cumsum(axis=0).cumsum(axis=1)
        return cum[: s.size, : t.size] / self.n

    def cross_cov(self, a_cells: np.ndarray, b_cells: np.ndarray) -> float:
        """``Cov(a(U), b(V))`` under the checkerboard coupling.

        ``a_cells[k]`` / ``b_cells[k]`` are the averages of each function over
        the k-th block of its coordinate.
        """
        a = a_cells - np.mean(a_cells)
        b = b_cells - np.mean(b_cells)
        return float(np.dot(a[self.ranks1], b[self.ranks2]) / self.n)


@dataclass(frozen=True)
class IndependenceCopula:
    """Exact product copula ``C(s, t) = s t``, for injection into the variance engine."""

    n: int | None = None

    def evaluate(self, u, v):
        out = np.asarray(u, dtype=float) * np.asarray(v, dtype=float)
        return float(out) if out.ndim == 0 else out

    def evaluate_grid(self, s, t):
        return np.outer(s, t)

    def cross_cov(self, a_cells: np.ndarray, b_cells: np.ndarray) -> float:
        return 0.0


def empirical_copula(paired: PairedSample) -> EmpiricalCopula:
    if paired.n < 2:
        raise SampleTooSmall("empirical copula needs at least 2 rows")
    n = paired.n
    u = np.searchsorted(np.sort(paired.x1), paired.x1, side="right") / n
    v = np.searchsorted(np.sort(paired.x2), paired.x2, side="right") / n
    return EmpiricalCopula(
        _frozen(np.column_stack([u, v])),
        n,
        _frozen(_ordinal_ranks(paired.x1)),
        _frozen(_ordinal_ranks(paired.x2)),
    )


@dataclass(frozen=True)
class Grid:
    """Midpoint grid ``s_k = (k - 1/2)/m`` on (0, 1)."""

    m: int = 256

    def __post_init__(self):
        if self.m < 1:
            raise OutOfRange("grid needs at least one node")

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(1, self.m + 1) - 0.5) / self.m


def _min_kernel_antiderivative(x: float, y: float) -> float:
    # int_0^x int_0^y min(s, t) dt ds
    lo, hi = (x, y) if x <= y else (y, x)
    return lo * lo * hi / 2.0 - lo**3 / 6.0


def kernel_rect_integral(a: float, b: float, c: float, d: float) -> float:
    """Exact ``int_a^b int_c^d (min(s, t) - s t) dt ds`` on the unit square."""
    for lo, hi in ((a, b), (c, d)):
        if not (0.0 <= lo <= hi <= 1.0):
            raise OutOfRange(f"rectangle side [{lo}, {hi}] outside [0, 1]")
    if a == b or c == d:
        return 0.0
    M = _min_kernel_antiderivative
    # grouped so that swapping the two sides gives bit-identical results
    mins = (M(b, d) + M(a, c)) - (M(a, d) + M(b, c))
    prod = (b * b - a * a) * (d * d - c * c) / 4.0
    return mins - prod


def _check_same_length(*arrays) -> int:
    sizes = {np.size(a) for a in arrays}
    if len(sizes) != 1:
        raise LengthMismatch(f"inputs have lengths {sorted(sizes)}")
    return sizes.pop()


"""One-period plug-in asymptotic variances for A_n and the Gini index.

Every covariance term is evaluated exactly under the plug-in law, in which a
uniform ``U`` selects the sample block ``k = ceil(nU)``. A functional of the
sample is represented as a :class:`BlockFunctional`:

    f(U) = block[k]  +  Psi_b(U),    Psi_b(u) = int_0^1 b(s) (1{u <= s} - s) ds,

with ``block`` and ``b`` constant on the ``n`` blocks ``((k-1)/n, k/n]``.
``Psi_b`` is piecewise linear, so all second moments reduce to closed-form
per-block sums. The Brownian-bridge double integral ``gamma_1(b, c)`` is the
covariance of ``Psi_b(U)`` and ``Psi_c(U)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

from .errors import NegativeVariance, OutOfRange, SampleTooSmall, ZeroMean
from .indices import gini_point
from .sample import EmpiricalDistribution, _check_same_length, kernel_rect_integral

__all__ = [
    "BlockFunctional",
    "PluginContext",
    "VarianceReport",
    "Interval",
    "build_plugin_context",
    "gamma1_exact",
    "gamma1_blocksum",
    "gamma_hh",
    "gamma_hid",
    "var_id",
    "gamma_h_beta",
    "gamma_id_beta",
    "sigma2_A",
    "sigma2_GI",
    "gini_ci",
    "lorenz_points",
    "normal_quantile",
]

TAIL_RATIO_WARN = 50.0
NEG_TOL = 1e-8


@dataclass(frozen=True)
class BlockFunctional:
    """Block-constant part plus a Brownian-bridge integral part, on ``n`` blocks."""

    block: np.ndarray
    psi: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.block.size

    @classmethod
    def pure_block(cls, values) -> "BlockFunctional":
        return cls(np.asarray(values, dtype=float))

    @classmethod
    def pure_psi(cls, values) -> "BlockFunctional":
        v = np.asarray(values, dtype=float)
        return cls(np.zeros_like(v), v)

    def __add__(self, other: "BlockFunctional") -> "BlockFunctional":
        return BlockFunctional(self.block + other.block, _add_opt(self.psi, other.psi))

    def __sub__(self, other: "BlockFunctional") -> "BlockFunctional":
        return self + other.scaled(-1.0)

    def scaled(self, c: float) -> "BlockFunctional":
        return BlockFunctional(c * self.block, None if self.psi is None else c * self.psi)

    def psi_endpoints(self) -> np.ndarray:
        """Values of ``Psi_b`` at ``k/n``, ``k = 0..n``."""
        return psi_endpoints(self.psi, self.n)

    def cell_means(self) -> np.ndarray:
        """Average of the functional over each block."""
        if self.psi is None:
            return self.block
        p = self.psi_endpoints()
        return self.block + 0.5 * (p[:-1] + p[1:])


def _add_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def psi_endpoints(b: np.ndarray | None, n: int) -> np.ndarray:
    if b is None:
        return np.zeros(n + 1)
    b = np.asarray(b, dtype=float)
    # int_{k/n}^1 b(s) ds for k = 0..n
    tail = np.concatenate([np.cumsum(b[::-1])[::-1], [0.0]]) / n
    j = np.arange(1, n + 1)
    first_moment = np.dot(b, 2.0 * j - 1.0) / (2.0 * n * n)
    return tail - first_moment


def cov_same(f: BlockFunctional, g: BlockFunctional) -> float:
    """``Cov(f(U), g(U))`` for ``U`` uniform on (0, 1), exact."""
    _check_same_length(f.block, g.block)
    fa = f.block - np.mean(f.cell_means())
    ga = g.block - np.mean(g.cell_means())
    p = f.psi_endpoints()
    q = g.psi_endpoints()
    p0, p1, q0, q1 = p[:-1], p[1:], q[:-1], q[1:]
    per_block = (
        fa * ga
        + fa * 0.5 * (q0 + q1)
        + ga * 0.5 * (p0 + p1)
        + (p0 * q0 + p1 * q1) / 3.0
        + (p0 * q1 + p1 * q0) / 6.0
    )
    return float(np.mean(per_block))


def gamma1_exact(f_blocks, g_blocks) -> float:
    """``int int f(s) g(t) (min(s,t) - st) ds dt`` for block-constant ``f``, ``g``.

    Computed in O(k) as the covariance of the two Brownian-bridge integrals.
    """
    k = _check_same_length(f_blocks, g_blocks)
    if k == 0:
        return 0.0
    return cov_same(BlockFunctional.pure_psi(f_blocks), BlockFunctional.pure_psi(g_blocks))


def gamma1_blocksum(f_blocks, g_blocks) -> float:
    """Same integral as :func:`gamma1_exact`, summed rectangle by rectangle in O(k^2)."""
    k = _check_same_length(f_blocks, g_blocks)
    f = np.asarray(f_blocks, dtype=float)
    g = np.asarray(g_blocks, dtype=float)
    edges = np.arange(k + 1) / k
    total = 0.0
    for i in range(k):
        if f[i] == 0:
            continue
        row = np.array(
            [kernel_rect_integral(edges[i], edges[i + 1], edges[j], edges[j + 1]) for j in range(k)]
        )
        total += f[i] * np.dot(row, g)
    return float(total)


@dataclass(frozen=True)
class PluginContext:
    """Plug-in versions of ``h(x) = x F(x)``, ``I_d`` and ``ell = F^{-1}`` on the sample blocks."""

    dist: EmpiricalDistribution
    h_values: np.ndarray
    ell_values: np.ndarray
    a_hat: float
    mean: float
    midrank: bool = False

    @property
    def id_values(self) -> np.ndarray:
        return self.dist.values_sorted

    @property
    def n(self) -> int:
        return self.dist.n

    @property
    def degenerate(self) -> bool:
        return self.dist.is_constant

    def h(self) -> BlockFunctional:
        return BlockFunctional.pure_block(self.h_values)

    def identity(self) -> BlockFunctional:
        return BlockFunctional.pure_block(self.ell_values)

    def beta(self) -> BlockFunctional:
        return BlockFunctional.pure_psi(self.ell_values)

    def gini_influence(self) -> BlockFunctional:
        """``(2/mu) (h - (A/mu) I_d + beta(ell))``; zero for a constant sample."""
        if self.degenerate:
            return BlockFunctional(np.zeros(self.n), np.zeros(self.n))
        c = 2.0 / self.mean
        block = c * (self.h_values - self.a_hat / self.mean * self.ell_values)
        return BlockFunctional(block, c * self.ell_values)


def build_plugin_context(dist: EmpiricalDistribution, midrank: bool = False) -> PluginContext:
    """Populate the plug-in sequences.

    ``h_values[j] = X_{j,n} * j/n`` (or ``(2j-1)/(2n)`` with ``midrank``).
    """
    if dist.n < 2:
        raise SampleTooSmall("variance estimation needs at least 2 observations")
    n = dist.n
    x = dist.values_sorted
    j = np.arange(1, n + 1, dtype=float)
    w = (j - 0.5) / n if midrank else j / n
    h = x * w
    return PluginContext(dist, h, x, float(np.mean(h)), dist.mean, midrank)


def gamma_hh(ctx: PluginContext) -> float:
    return float(np.mean((ctx.h_values - np.mean(ctx.h_values)) ** 2))


def gamma_hid(ctx: PluginContext) -> float:
    x = ctx.id_values
    return float(np.mean((ctx.h_values - np.mean(ctx.h_values)) * (x - np.mean(x))))


def var_id(ctx: PluginContext) -> float:
    x = ctx.id_values
    return float(np.mean((x - np.mean(x)) ** 2))


def gamma_h_beta(ctx: PluginContext) -> float:
    """``int ell(s) (int_{x <= F^-1(s)} h dF - s P(h)) ds`` under the plug-in law."""
    return cov_same(ctx.h(), ctx.beta())


def gamma_id_beta(ctx: PluginContext) -> float:
    return cov_same(ctx.identity(), ctx.beta())


@dataclass(frozen=True)
class VarianceReport:
    """An asymptotic variance together with the named terms it is assembled from.

    ``formula`` names the assembly rule used by :meth:`reconstruct`.
    """

    sigma2: float
    terms: dict
    n: int
    formula: str
    warnings: tuple = field(default=())

    def reconstruct(self) -> float:
        return _ASSEMBLERS[self.formula](self.terms)

    def as_dict(self) -> dict:
        return {
            "sigma2": self.sigma2,
            "n": self.n,
            "formula": self.formula,
            "terms": dict(self.terms),
            "warnings": list(self.warnings),
        }


def _assemble_A(t):
    return t["Gamma(h,h)"] + t["gamma1(ell,ell)"] + 2.0 * t["Gamma(h,beta_ell)"]


def _assemble_GI(t):
    mu, a = t["mu"], t["A"]
    return (4.0 / mu**2) * (
        _assemble_A(t)
        + (a * a / mu**2) * t["Gamma(I_d,I_d)"]
        - (2.0 * a / mu) * (t["Gamma(h,I_d)"] + t["Gamma(I_d,beta_ell)"])
    )


_ASSEMBLERS = {"sigma2_A": _assemble_A, "sigma2_GI": _assemble_GI}


def register_assembler(name, fn):
    _ASSEMBLERS[name] = fn


def clamp_variance(value: float, scale: float, notes: list, label: str) -> float:
    """Clamp round-off negatives to 0; refuse genuinely negative variances."""
    if value >= 0:
        return value
    tol = NEG_TOL * max(1.0, scale)
    if value >= -tol:
        notes.append(f"{label}: clamped round-off negative {value:.3e} to 0")
        return 0.0
    raise NegativeVariance(f"{label} is negative ({value:.6e}); this indicates a bug")


def _one_phase_notes(ctx: PluginContext) -> list:
    notes = []
    if ctx.degenerate:
        notes.append("constant sample: all centered terms vanish, variance set to 0")
    elif ctx.dist.values_sorted[-1] / ctx.mean > TAIL_RATIO_WARN:
        notes.append(
            f"heavy tail: max/mean = {ctx.dist.values_sorted[-1] / ctx.mean:.1f} > "
            f"{TAIL_RATIO_WARN:g}; the bounded-quantile assumption is doubtful"
        )
    return notes


def _a_terms(ctx: PluginContext) -> dict:
    if ctx.degenerate:
        return {"Gamma(h,h)": 0.0, "gamma1(ell,ell)": 0.0, "Gamma(h,beta_ell)": 0.0}
    return {
        "Gamma(h,h)": gamma_hh(ctx),
        "gamma1(ell,ell)": gamma1_exact(ctx.ell_values, ctx.ell_values),
        "Gamma(h,beta_ell)": gamma_h_beta(ctx),
    }


def sigma2_A(ctx: PluginContext) -> VarianceReport:
    """Asymptotic variance of ``sqrt(n)(A_n - A)``."""
    notes = _one_phase_notes(ctx)
    terms = _a_terms(ctx)
    raw = _assemble_A(terms)
    scale = sum(abs(v) for v in terms.values())
    s2 = clamp_variance(raw, scale, notes, "sigma2_A")
    return VarianceReport(s2, terms, ctx.n, "sigma2_A", tuple(notes))


def sigma2_GI(ctx: PluginContext) -> VarianceReport:
    """Asymptotic variance of ``sqrt(n)(GI_n - GI)``."""
    if not ctx.mean > 0:
        raise ZeroMean("Gini variance needs a positive mean")
    notes = _one_phase_notes(ctx)
    terms = _a_terms(ctx)
    if ctx.degenerate:
        terms.update({"Gamma(I_d,I_d)": 0.0, "Gamma(h,I_d)": 0.0, "Gamma(I_d,beta_ell)": 0.0})
    else:
        terms.update(
            {
                "Gamma(I_d,I_d)": var_id(ctx),
                "Gamma(h,I_d)": gamma_hid(ctx),
                "Gamma(I_d,beta_ell)": gamma_id_beta(ctx),
            }
        )
    terms["mu"] = ctx.mean
    terms["A"] = ctx.a_hat
    raw = _assemble_GI(terms)
    scale = (4.0 / ctx.mean**2) * sum(abs(v) for k, v in terms.items() if k not in ("mu", "A"))
    s2 = clamp_variance(raw, scale, notes, "sigma2_GI")
    return VarianceReport(s2, terms, ctx.n, "sigma2_GI", tuple(notes))


class Interval(NamedTuple):
    lower: float
    upper: float


def normal_quantile(p: float) -> float:
    return float(ndtri(p))


def _check_level(level: float) -> None:
    if not (0.0 < level < 1.0):
        raise OutOfRange("confidence level must lie in (0, 1)")


def gini_ci(dist: EmpiricalDistribution, level: float = 0.95, report: VarianceReport | None = None) -> Interval:
    """Normal-approximation interval ``GI_n +- z sqrt(sigma2_GI / n)``, clipped to [-1, 1]."""
    _check_level(level)
    if report is None:
        report = sigma2_GI(build_plugin_context(dist))
    g = gini_point(dist).value
    half = normal_quantile(0.5 + level / 2.0) * np.sqrt(report.sigma2 / dist.n)
    return Interval(float(max(-1.0, g - half)), float(min(1.0, g + half)))


def lorenz_points(dist: EmpiricalDistribution) -> np.ndarray:
    """Rows ``(j/n, L(j/n))`` of the empirical Lorenz curve."""
    x = dist.values_sorted
    share = np.cumsum(x) / np.sum(x)
    share[-1] = 1.0
    p = np.arange(1, dist.n + 1) / dist.n
    return np.column_stack([p, share])

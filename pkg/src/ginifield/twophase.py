"""Two-period inference: variations of the Gini index and of a poverty index, and their ratio.

Both periods are linked through the copula of the income couple. The plug-in
law is the checkerboard extension of the empirical copula (see
:class:`~ginifield.sample.EmpiricalCopula`), so each period's margin is
exactly uniform and every term below is a genuine covariance; in particular
the assembled 2x2 covariance matrix is positive semidefinite up to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import MissingResidualFunctions, NearZeroDenominator, ZeroMean
from .field import (
    BlockFunctional,
    Interval,
    PluginContext,
    VarianceReport,
    _check_level,
    build_plugin_context,
    clamp_variance,
    cov_same,
    normal_quantile,
    register_assembler,
)
from .indices import GpiConfig, gini_point, gpi_point
from .sample import (
    EmpiricalCopula,
    Grid,
    IndependenceCopula,
    PairedSample,
    _check_same_length,
    empirical_copula,
)

__all__ = [
    "PairFunctional",
    "TwoPhaseContext",
    "JointCovariance",
    "RatioReport",
    "build_two_phase",
    "delta_gini",
    "delta_gpi",
    "gamma_star",
    "gamma_star_rows",
    "gamma2_exact",
    "gamma2_grid",
    "sigma2_delta_gini",
    "sigma2_delta_gpi",
    "cov_deltas",
    "ratio_inference",
]

Copula = Union[EmpiricalCopula, IndependenceCopula]


@dataclass(frozen=True)
class PairFunctional:
    """``f(U1, U2) = first(U1) + second(U2)`` with block functionals on each period."""

    first: BlockFunctional
    second: BlockFunctional

    def __add__(self, other):
        return PairFunctional(self.first + other.first, self.second + other.second)

    def __sub__(self, other):
        return PairFunctional(self.first - other.first, self.second - other.second)

    def row_values(self, copula: EmpiricalCopula) -> np.ndarray:
        """Block parts evaluated at each observed couple."""
        return self.first.block[copula.ranks1] + self.second.block[copula.ranks2]


def gamma_star(f: PairFunctional, g: PairFunctional, copula: Copula) -> float:
    """``Gamma*(f, g)``: covariance of ``f`` and ``g`` under the plug-in copula."""
    return (
        cov_same(f.first, g.first)
        + cov_same(f.second, g.second)
        + copula.cross_cov(f.first.cell_means(), g.second.cell_means())
        + copula.cross_cov(g.first.cell_means(), f.second.cell_means())
    )


def gamma_star_rows(f_rows, g_rows, n: int | None = None) -> float:
    """Sample covariance ``(1/n) sum (f_i - fbar)(g_i - gbar)`` of per-row evaluations."""
    m = _check_same_length(f_rows, g_rows)
    if n is not None and n != m:
        raise ValueError(f"n = {n} does not match {m} rows")
    f = np.asarray(f_rows, dtype=float)
    g = np.asarray(g_rows, dtype=float)
    return float(np.mean((f - f.mean()) * (g - g.mean())))


def gamma2_exact(f_blocks, g_blocks, copula: Copula) -> float:
    """``int int f(s) g(t) (C(s,t) - st) ds dt`` with ``f`` on period 1 and ``g`` on period 2."""
    _check_same_length(f_blocks, g_blocks)
    a = BlockFunctional.pure_psi(f_blocks).cell_means()
    b = BlockFunctional.pure_psi(g_blocks).cell_means()
    return copula.cross_cov(a, b)


def gamma2_grid(f_nodes, g_nodes, copula: Copula, grid: Grid) -> float:
    """Midpoint-rule version of :func:`gamma2_exact` on ``grid`` using ``copula.evaluate``."""
    _check_same_length(f_nodes, g_nodes, grid.nodes)
    s = grid.nodes
    kernel = copula.evaluate_grid(s, s) - np.outer(s, s)
    return float(np.asarray(f_nodes) @ kernel @ np.asarray(g_nodes) / grid.m**2)


@dataclass(frozen=True)
class TwoPhaseContext:
    """Plug-in ingredients for both periods.

    ``gini`` holds ``F*``, ``F~*`` and ``beta*_L`` as pair functionals and
    ``gpi`` holds ``F*_J`` and ``beta*_nu`` (empty when no poverty index was
    configured).
    """

    paired: PairedSample
    ctx1: PluginContext
    ctx2: PluginContext
    copula: Copula
    gpi_cfg1: Optional[GpiConfig]
    gpi_cfg2: Optional[GpiConfig]
    gini: dict = field(repr=False)
    gpi: dict = field(repr=False)
    L1_values: np.ndarray = field(repr=False)
    L2_values: np.ndarray = field(repr=False)
    nu1_values: Optional[np.ndarray] = field(default=None, repr=False)
    nu2_values: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.paired.n

    @property
    def Fstar_values(self) -> np.ndarray:
        return self.gini["F*"].row_values(self._row_copula)

    @property
    def Ftilde_values(self) -> np.ndarray:
        return self.gini["F~*"].row_values(self._row_copula)

    @property
    def FJ_values(self) -> np.ndarray:
        return self.gpi["F*_J"].row_values(self._row_copula)

    @property
    def _row_copula(self) -> EmpiricalCopula:
        if isinstance(self.copula, EmpiricalCopula):
            return self.copula
        return empirical_copula(self.paired)

    def with_copula(self, copula: Copula) -> "TwoPhaseContext":
        """Same margins, different coupling (e.g. an injected :class:`IndependenceCopula`)."""
        return TwoPhaseContext(
            self.paired, self.ctx1, self.ctx2, copula, self.gpi_cfg1, self.gpi_cfg2,
            self.gini, self.gpi, self.L1_values, self.L2_values, self.nu1_values, self.nu2_values,
        )


def _zero(n):
    return BlockFunctional(np.zeros(n), np.zeros(n))


def _gini_parts(ctx: PluginContext):
    """``(H, T, L)`` with ``H = (2/mu) h``, ``T = (2A/mu^2) ell``, ``L = (2/mu) ell``."""
    n = ctx.n
    if ctx.degenerate:
        z = np.zeros(n)
        return z, z, z
    c = 2.0 / ctx.mean
    return c * ctx.h_values, c * ctx.a_hat / ctx.mean * ctx.ell_values, c * ctx.ell_values


def _check_gpi(cfg: GpiConfig, period: int) -> None:
    if not cfg.has_residuals:
        raise MissingResidualFunctions(
            f"period {period} poverty index ({cfg.label}) has no residual functions (g, nu); "
            "supply them in GpiConfig or use an FGT index"
        )


def build_two_phase(
    paired: PairedSample,
    gpi_cfg1: Optional[GpiConfig] = None,
    gpi_cfg2: Optional[GpiConfig] = None,
    copula: Optional[Copula] = None,
    midrank: bool = False,
) -> TwoPhaseContext:
    """Assemble the two-period plug-in context.

    ``gpi_cfg2`` defaults to ``gpi_cfg1``. When a poverty index is given its
    residual functions ``g`` (income -> real) and ``nu`` ((0,1) -> real) must
    be present; ``nu`` is evaluated at block midpoints.
    """
    if gpi_cfg2 is None:
        gpi_cfg2 = gpi_cfg1
    ctx1 = build_plugin_context(paired.margin(1), midrank)
    ctx2 = build_plugin_context(paired.margin(2), midrank)
    for ctx in (ctx1, ctx2):
        if not ctx.mean > 0:
            raise ZeroMean("both periods need a positive mean")
    if copula is None:
        copula = empirical_copula(paired)
    n = paired.n
    H1, T1, L1 = _gini_parts(ctx1)
    H2, T2, L2 = _gini_parts(ctx2)
    zero = np.zeros(n)
    gini = {
        "F*": PairFunctional(BlockFunctional(-H1), BlockFunctional(H2)),
        "F~*": PairFunctional(BlockFunctional(-T1), BlockFunctional(T2)),
        "beta*_L": PairFunctional(BlockFunctional(zero, -L1), BlockFunctional(zero, L2)),
    }
    gpi = {}
    nu1 = nu2 = None
    if gpi_cfg1 is not None:
        _check_gpi(gpi_cfg1, 1)
        _check_gpi(gpi_cfg2, 2)
        mids = (np.arange(1, n + 1) - 0.5) / n
        g1 = np.broadcast_to(np.asarray(gpi_cfg1.residual_g(ctx1.ell_values), float), (n,))
        g2 = np.broadcast_to(np.asarray(gpi_cfg2.residual_g(ctx2.ell_values), float), (n,))
        nu1 = np.broadcast_to(np.asarray(gpi_cfg1.residual_nu(mids), float), (n,)).copy()
        nu2 = np.broadcast_to(np.asarray(gpi_cfg2.residual_nu(mids), float), (n,)).copy()
        gpi = {
            "F*_J": PairFunctional(BlockFunctional(-g1), BlockFunctional(g2.copy())),
            "beta*_nu": PairFunctional(BlockFunctional(zero, -nu1), BlockFunctional(zero, nu2)),
        }
    return TwoPhaseContext(
        paired, ctx1, ctx2, copula, gpi_cfg1, gpi_cfg2, gini, gpi, L1, L2, nu1, nu2
    )


def delta_gini(ctx: TwoPhaseContext) -> float:
    return gini_point(ctx.ctx2.dist).value - gini_point(ctx.ctx1.dist).value


def delta_gpi(ctx: TwoPhaseContext, cfg1: Optional[GpiConfig] = None, cfg2: Optional[GpiConfig] = None) -> float:
    cfg1 = cfg1 or ctx.gpi_cfg1
    cfg2 = cfg2 or ctx.gpi_cfg2 or cfg1
    if cfg1 is None:
        raise MissingResidualFunctions("no poverty index configured")
    return gpi_point(ctx.ctx2.dist, cfg2).value - gpi_point(ctx.ctx1.dist, cfg1).value


def _require_gpi(ctx: TwoPhaseContext):
    if not ctx.gpi:
        raise MissingResidualFunctions("two-period poverty variance needs a GPI with (g, nu)")


def _assemble_dgi(t):
    bb = t["gamma1(L1,L1)"] + t["gamma1(L2,L2)"] - 2.0 * t["gamma2(L1,L2)"]
    return (
        t["Gamma*(F*,F*)"] + t["Gamma*(F~*,F~*)"] + bb
        - 2.0 * (t["Gamma*(F*,F~*)"] + t["Gamma*(F~*,beta*_L)"] - t["Gamma*(F*,beta*_L)"])
    )


def _assemble_dgpi(t):
    nn = t["gamma1(nu1,nu1)"] - 2.0 * t["gamma2(nu1,nu2)"] + t["gamma1(nu2,nu2)"]
    return t["Gamma*(F*_J,F*_J)"] + nn + 2.0 * t["Gamma*(F*_J,beta*_nu)"]


def _assemble_cov(t):
    bl_nu = (
        t["gamma1(L1,nu1)"] + t["gamma1(L2,nu2)"] - t["gamma2(L1,nu2)"] - t["gamma2(nu1,L2)"]
    )
    return (
        t["Gamma*(F*_J,F*)"] + t["Gamma*(F*_J,beta*_L)"] - t["Gamma*(F*_J,F~*)"]
        + t["Gamma*(F*,beta*_nu)"] + bl_nu - t["Gamma*(F~*,beta*_nu)"]
    )


register_assembler("sigma2_delta_gini", _assemble_dgi)
register_assembler("sigma2_delta_gpi", _assemble_dgpi)
register_assembler("cov_deltas", _assemble_cov)


def _scale(terms):
    return sum(abs(v) for v in terms.values())


def _notes(ctx: TwoPhaseContext) -> list:
    notes = []
    for j, c in ((1, ctx.ctx1), (2, ctx.ctx2)):
        if c.degenerate:
            notes.append(f"period {j} sample is constant; its Gini terms are set to 0")
    if isinstance(ctx.copula, IndependenceCopula):
        notes.append("independence copula injected in place of the empirical copula")
    return notes


def _gini_terms(ctx: TwoPhaseContext) -> dict:
    G, C = ctx.gini, ctx.copula
    F, Ft, B = G["F*"], G["F~*"], G["beta*_L"]
    return {
        "Gamma*(F*,F*)": gamma_star(F, F, C),
        "Gamma*(F~*,F~*)": gamma_star(Ft, Ft, C),
        "Gamma*(F*,F~*)": gamma_star(F, Ft, C),
        "Gamma*(F~*,beta*_L)": gamma_star(Ft, B, C),
        "Gamma*(F*,beta*_L)": gamma_star(F, B, C),
        "gamma1(L1,L1)": cov_same(B.first, B.first),
        "gamma1(L2,L2)": cov_same(B.second, B.second),
        "gamma2(L1,L2)": gamma2_exact(ctx.L1_values, ctx.L2_values, C),
        "Gamma*(beta*_L,beta*_L)": gamma_star(B, B, C),
    }


def sigma2_delta_gini(ctx: TwoPhaseContext) -> VarianceReport:
    """Asymptotic variance of ``sqrt(n)(dGI_n - dGI)``."""
    notes = _notes(ctx)
    terms = _gini_terms(ctx)
    s2 = clamp_variance(_assemble_dgi(terms), _scale(terms), notes, "sigma2_delta_gini")
    return VarianceReport(s2, terms, ctx.n, "sigma2_delta_gini", tuple(notes))


def _gpi_terms(ctx: TwoPhaseContext) -> dict:
    C = ctx.copula
    FJ, Bn = ctx.gpi["F*_J"], ctx.gpi["beta*_nu"]
    return {
        "Gamma*(F*_J,F*_J)": gamma_star(FJ, FJ, C),
        "Gamma*(F*_J,beta*_nu)": gamma_star(FJ, Bn, C),
        "gamma1(nu1,nu1)": cov_same(Bn.first, Bn.first),
        "gamma1(nu2,nu2)": cov_same(Bn.second, Bn.second),
        "gamma2(nu1,nu2)": gamma2_exact(ctx.nu1_values, ctx.nu2_values, C),
        "Gamma*(beta*_nu,beta*_nu)": gamma_star(Bn, Bn, C),
    }


def sigma2_delta_gpi(ctx: TwoPhaseContext) -> VarianceReport:
    """Asymptotic variance of ``sqrt(n)(dJ_n - dJ)``."""
    _require_gpi(ctx)
    notes = _notes(ctx)
    terms = _gpi_terms(ctx)
    s2 = clamp_variance(_assemble_dgpi(terms), _scale(terms), notes, "sigma2_delta_gpi")
    return VarianceReport(s2, terms, ctx.n, "sigma2_delta_gpi", tuple(notes))


@dataclass(frozen=True)
class JointCovariance:
    sigma2_dGI: float
    sigma2_dGPI: float
    cov: float
    terms: dict
    warnings: tuple = ()

    @property
    def matrix(self) -> np.ndarray:
        """``[[var dJ, cov], [cov, var dGI]]``."""
        return np.array([[self.sigma2_dGPI, self.cov], [self.cov, self.sigma2_dGI]])

    def as_dict(self) -> dict:
        return {
            "sigma2_dGI": self.sigma2_dGI,
            "sigma2_dGPI": self.sigma2_dGPI,
            "cov": self.cov,
            "terms": dict(self.terms),
            "warnings": list(self.warnings),
        }


def cov_deltas(ctx: TwoPhaseContext) -> JointCovariance:
    """Joint asymptotic covariance of ``(dJ_n, dGI_n)``."""
    _require_gpi(ctx)
    C = ctx.copula
    F, Ft, BL = ctx.gini["F*"], ctx.gini["F~*"], ctx.gini["beta*_L"]
    FJ, Bn = ctx.gpi["F*_J"], ctx.gpi["beta*_nu"]
    terms = {
        "Gamma*(F*_J,F*)": gamma_star(FJ, F, C),
        "Gamma*(F*_J,beta*_L)": gamma_star(FJ, BL, C),
        "Gamma*(F*_J,F~*)": gamma_star(FJ, Ft, C),
        "Gamma*(F*,beta*_nu)": gamma_star(F, Bn, C),
        "Gamma*(F~*,beta*_nu)": gamma_star(Ft, Bn, C),
        "gamma1(L1,nu1)": cov_same(BL.first, Bn.first),
        "gamma1(L2,nu2)": cov_same(BL.second, Bn.second),
        "gamma2(L1,nu2)": gamma2_exact(ctx.L1_values, ctx.nu2_values, C),
        "gamma2(nu1,L2)": gamma2_exact(ctx.nu1_values, ctx.L2_values, C),
        "Gamma*(beta*_L,beta*_nu)": gamma_star(BL, Bn, C),
    }
    vg = sigma2_delta_gini(ctx)
    vj = sigma2_delta_gpi(ctx)
    cov = _assemble_cov(terms)
    ledger = {f"dGI:{k}": v for k, v in vg.terms.items()}
    ledger.update({f"dGPI:{k}": v for k, v in vj.terms.items()})
    ledger.update({f"cov:{k}": v for k, v in terms.items()})
    notes = tuple(dict.fromkeys(vg.warnings + vj.warnings))
    return JointCovariance(vg.sigma2, vj.sigma2, cov, ledger, notes)


@dataclass(frozen=True)
class RatioReport:
    R: float
    a: float
    b: float
    sigma2_R: float
    ci: Interval
    level: float
    delta_gpi: float
    delta_gini: float
    joint: JointCovariance
    n: int
    warnings: tuple = ()

    def reconstruct(self) -> float:
        j = self.joint
        return self.a**2 * j.sigma2_dGPI + self.b**2 * j.sigma2_dGI - 2.0 * self.a * self.b * j.cov

    def as_dict(self) -> dict:
        return {
            "R": self.R,
            "a": self.a,
            "b": self.b,
            "sigma2_R": self.sigma2_R,
            "ci": list(self.ci),
            "level": self.level,
            "delta_gpi": self.delta_gpi,
            "delta_gini": self.delta_gini,
            "n": self.n,
            "joint": self.joint.as_dict(),
            "warnings": list(self.warnings),
        }


def default_denom_floor(ctx: TwoPhaseContext) -> float:
    g1 = gini_point(ctx.ctx1.dist).value
    g2 = gini_point(ctx.ctx2.dist).value
    return 1e-6 * max(abs(g1), abs(g2), 1e-3)


def ratio_inference(ctx: TwoPhaseContext, level: float = 0.95, denom_floor: float | None = None) -> RatioReport:
    """Pro-poor ratio ``R = dJ / dGI`` with its delta-method variance and interval.

    Raises
    ------
    NearZeroDenominator
        When ``|dGI_n|`` does not exceed ``denom_floor``; the ratio and its
        linearization are meaningless there.
    """
    _check_level(level)
    dgi = delta_gini(ctx)
    floor = default_denom_floor(ctx) if denom_floor is None else denom_floor
    if abs(dgi) <= floor:
        raise NearZeroDenominator(
            f"Gini variation {dgi:.3e} is within the floor {floor:.3e}; the ratio is not identified"
        )
    dj = delta_gpi(ctx)
    joint = cov_deltas(ctx)
    a = 1.0 / dgi
    b = dj / dgi**2
    notes = list(joint.warnings)
    raw = a * a * joint.sigma2_dGPI + b * b * joint.sigma2_dGI - 2.0 * a * b * joint.cov
    scale = a * a * joint.sigma2_dGPI + b * b * joint.sigma2_dGI + 2.0 * abs(a * b * joint.cov)
    s2 = clamp_variance(raw, scale, notes, "sigma2_R")
    R = dj / dgi
    half = normal_quantile(0.5 + level / 2.0) * np.sqrt(s2 / ctx.n)
    return RatioReport(R, a, b, s2, Interval(R - half, R + half), level, dj, dgi, joint, ctx.n, tuple(notes))

"""Seeded simulation, population truths and validation studies.

Random numbers come from numpy's counter-based Philox generator keyed by
``SeedSequence(seed, spawn_key=(r,))`` for replicate ``r``; every replicate
is an independent task, so results do not depend on how many worker
threads run them (``GINIFIELD_THREADS``).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import integrate, stats
from scipy.special import ndtr, ndtri

from .errors import BadParameters, NonIntegrable
from .field import build_plugin_context, gini_ci, normal_quantile, sigma2_GI
from .indices import GpiConfig, gini_point
from .sample import PairedSample, make_distribution, make_paired
from .twophase import build_two_phase, delta_gini, delta_gpi, ratio_inference, sigma2_delta_gini, sigma2_delta_gpi

__all__ = [
    "DistributionSpec",
    "CopulaSpec",
    "SimulationPlan",
    "ValidationReport",
    "ReplicateTable",
    "uniform_stream",
    "sample_univariate",
    "sample_paired",
    "true_gini",
    "true_gpi",
    "true_sigma2_gini",
    "bahadur_remainder",
    "bahadur_components",
    "run_replicates",
    "variance_agreement",
    "coverage_study",
    "worker_count",
]

_FAMILIES = {"uniform": 2, "exponential": 1, "lognormal": 2, "pareto": 2}


@dataclass(frozen=True)
class DistributionSpec:
    """A positive income law, optionally transformed as ``mult * X + shift``.

    Parameters per family: ``uniform(a, b)``, ``exponential(rate)``,
    ``lognormal(location, scale)`` (of the log), ``pareto(alpha, xm)``.
    """

    family: str
    params: tuple
    mult: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise BadParameters(f"unknown family {self.family!r}; choose from {sorted(_FAMILIES)}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if len(p) != _FAMILIES[self.family]:
            raise BadParameters(f"{self.family} takes {_FAMILIES[self.family]} parameter(s), got {len(p)}")
        if not all(math.isfinite(v) for v in p + (self.mult, self.shift)):
            raise BadParameters("parameters must be finite")
        ok = {
            "uniform": lambda a, b: b > a > 0,
            "exponential": lambda r: r > 0,
            "lognormal": lambda m, s: s > 0,
            "pareto": lambda al, xm: al > 1 and xm > 0,
        }[self.family](*p)
        if not ok:
            raise BadParameters(f"parameters {p} outside the domain of {self.family}")
        if not (self.mult > 0 and self.shift >= 0):
            raise BadParameters("affine transform needs mult > 0 and shift >= 0")

    @classmethod
    def uniform(cls, a: float, b: float):
        return cls("uniform", (a, b))

    @classmethod
    def exponential(cls, rate: float = 1.0):
        return cls("exponential", (rate,))

    @classmethod
    def lognormal(cls, location: float = 0.0, scale: float = 1.0):
        return cls("lognormal", (location, scale))

    @classmethod
    def pareto(cls, alpha: float, xm: float = 1.0):
        return cls("pareto", (alpha, xm))

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        """Parse ``"family:p1,p2"`` (e.g. ``"pareto:3,1"``); defaults fill missing parameters."""
        name, _, rest = text.strip().partition(":")
        vals = [float(v) for v in rest.split(",") if v.strip()] if rest else []
        defaults = {"uniform": [0.5, 1.5], "exponential": [1.0], "lognormal": [0.0, 1.0], "pareto": [3.0, 1.0]}
        if name not in defaults:
            raise BadParameters(f"unknown family {name!r}")
        full = vals + defaults[name][len(vals):]
        return cls(name, tuple(full))

    def affine(self, mult: float = 1.0, shift: float = 0.0) -> "DistributionSpec":
        return replace(self, mult=self.mult * mult, shift=self.shift * mult + shift)

    @property
    def label(self) -> str:
        s = f"{self.family}({', '.join(f'{v:g}' for v in self.params)})"
        if self.mult != 1.0 or self.shift != 0.0:
            s = f"{self.mult:g}*{s}+{self.shift:g}"
        return s

    # base law -----------------------------------------------------------
    def _law(self):
        p = self.params
        if self.family == "uniform":
            return stats.uniform(loc=p[0], scale=p[1] - p[0])
        if self.family == "exponential":
            return stats.expon(scale=1.0 / p[0])
        if self.family == "lognormal":
            return stats.lognorm(s=p[1], scale=math.exp(p[0]))
        return stats.pareto(b=p[0], scale=p[1])

    def _base_tail(self, u):
        """``int_u^1 F0^{-1}(t) dt`` for the untransformed law."""
        u = np.asarray(u, dtype=float)
        p = self.params
        if self.family == "uniform":
            a, b = p
            return a * (1 - u) + (b - a) * (1 - u * u) / 2.0
        if self.family == "exponential":
            with np.errstate(divide="ignore", invalid="ignore"):
                out = (1 - u) * (1 - np.log1p(-u)) / p[0]
            return np.where(u < 1, out, 0.0)
        if self.family == "lognormal":
            m, s = p
            return math.exp(m + s * s / 2) * ndtr(s - ndtri(u))
        al, xm = p
        return xm * (1 - u) ** (1 - 1 / al) / (1 - 1 / al)

    def _base_gini(self) -> float:
        p = self.params
        if self.family == "uniform":
            return (p[1] - p[0]) / (3.0 * (p[0] + p[1]))
        if self.family == "exponential":
            return 0.5
        if self.family == "lognormal":
            return float(2.0 * ndtr(p[1] / math.sqrt(2.0)) - 1.0)
        return 1.0 / (2.0 * p[0] - 1.0)

    # transformed law ----------------------------------------------------
    def ppf(self, u):
        return self.mult * self._law().ppf(u) + self.shift

    def cdf(self, x):
        return self._law().cdf((np.asarray(x, dtype=float) - self.shift) / self.mult)

    def sf(self, x):
        return self._law().sf((np.asarray(x, dtype=float) - self.shift) / self.mult)

    @property
    def mean(self) -> float:
        return float(self.mult * self._law().mean() + self.shift)

    @property
    def lower(self) -> float:
        return float(self.ppf(0.0))

    def tail_integral(self, u):
        """``int_u^1 F^{-1}(t) dt``."""
        u = np.asarray(u, dtype=float)
        return self.mult * self._base_tail(u) + self.shift * (1 - u)


@dataclass(frozen=True)
class CopulaSpec:
    family: str = "independence"
    param: float = 0.0

    def __post_init__(self):
        f, p = self.family, self.param
        if f == "gaussian" and not (-1 < p < 1):
            raise BadParameters("gaussian copula needs rho in (-1, 1)")
        elif f == "clayton" and not (p > 0 and math.isfinite(p)):
            raise BadParameters("clayton copula needs theta > 0")
        elif f not in ("independence", "gaussian", "clayton", "comonotone"):
            raise BadParameters(f"unknown copula {f!r}")

    @classmethod
    def parse(cls, text: str) -> "CopulaSpec":
        name, _, rest = text.strip().partition(":")
        return cls(name, float(rest) if rest else 0.0)

    @property
    def kendall_tau(self) -> float:
        if self.family == "clayton":
            return self.param / (self.param + 2.0)
        if self.family == "gaussian":
            return 2.0 / math.pi * math.asin(self.param)
        return 1.0 if self.family == "comonotone" else 0.0

    @property
    def label(self) -> str:
        return self.family if self.family in ("independence", "comonotone") else f"{self.family}({self.param:g})"


def _check_seed(seed: int) -> int:
    if int(seed) != seed or seed < 0 or seed >= 2**64:
        raise BadParameters("seed must be an integer in [0, 2^64)")
    return int(seed)


def uniform_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_seed(seed), spawn_key=key)))


def _open_uniforms(gen: np.random.Generator, n: int) -> np.ndarray:
    # random() returns k / 2^53; the half-step offset keeps values inside (0, 1)
    return gen.random(n) + 2.0**-54


def _check_n(n: int, low: int = 1) -> int:
    if int(n) != n or n < low:
        raise BadParameters(f"sample size must be an integer >= {low}")
    return int(n)


def sample_univariate(spec: DistributionSpec, n: int, seed: int, *key: int) -> np.ndarray:
    """``n`` draws of ``spec`` by inverse transform of a seeded uniform stream."""
    n = _check_n(n)
    return spec.ppf(_open_uniforms(uniform_stream(seed, *key), n))


def _copula_uniforms(cop: CopulaSpec, gen: np.random.Generator, n: int):
    u = _open_uniforms(gen, n)
    w = _open_uniforms(gen, n)
    if cop.family == "independence":
        v = w
    elif cop.family == "comonotone":
        v = u
    elif cop.family == "gaussian":
        rho = cop.param
        z = rho * ndtri(u) + math.sqrt(1 - rho * rho) * ndtri(w)
        v = ndtr(z)
    else:
        th = cop.param
        v = ((w ** (-th / (1 + th)) - 1.0) * u ** (-th) + 1.0) ** (-1.0 / th)
    return u, np.clip(v, 2.0**-54, 1 - 2.0**-53)


def sample_paired(
    copula: CopulaSpec, marg1: DistributionSpec, marg2: DistributionSpec, n: int, seed: int, *key: int
) -> PairedSample:
    """Couples ``(F1^{-1}(U), F2^{-1}(V))`` with ``(U, V)`` drawn from ``copula``."""
    n = _check_n(n, 2)
    u, v = _copula_uniforms(copula, uniform_stream(seed, *key), n)
    return make_paired(marg1.ppf(u), marg2.ppf(v))


# population truths -------------------------------------------------------

def _quad(fn, a, b, what, **kw):
    try:
        val, err = integrate.quad(fn, a, b, limit=400, epsabs=1e-13, epsrel=1e-11, full_output=False, **kw)
    except Exception as exc:  # noqa: BLE001
        raise NonIntegrable(f"{what}: quadrature failed ({exc})") from exc
    if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise NonIntegrable(f"{what}: quadrature did not converge (estimate {val}, error {err})")
    return val


def true_gini(spec: DistributionSpec, method: str = "closed") -> float:
    """Population Gini index.

    ``method="quadrature"`` integrates ``1 - (1/mu) int S(x)^2 dx`` instead of
    using the closed form.
    """
    mu = spec.mean
    if method == "closed":
        base_mu = (mu - spec.shift) / spec.mult
        return spec.mult * base_mu * spec._base_gini() / mu
    if method != "quadrature":
        raise BadParameters(f"unknown method {method!r}")
    lo = spec.lower
    hi = spec.ppf(1.0)
    tail = _quad(lambda x: float(spec.sf(x)) ** 2, lo, hi, "Gini")
    return 1.0 - (lo + tail) / mu


def true_gpi(spec: DistributionSpec, cfg: GpiConfig) -> float:
    """Population value of an FGT, Sen or Kakwani index at ``cfg.poverty_line``."""
    z = cfg.poverty_line
    fz = float(spec.cdf(z))
    if fz == 0.0:
        return 0.0

    def gap(u):
        return max(z - float(spec.ppf(u)), 0.0) / z

    if cfg.kind == "fgt":
        a = cfg.params["alpha"]
        if a == 0:
            return fz
        return _quad(lambda u: gap(u) ** a, 0.0, fz, "FGT")
    if cfg.kind == "sen":
        return 2.0 * _quad(lambda u: (1 - u / fz) * gap(u), 0.0, fz, "Sen")
    if cfg.kind == "kakwani":
        k = cfg.params["kappa"]
        return (k + 1) * _quad(lambda u: (1 - u / fz) ** k * gap(u), 0.0, fz, "Kakwani")
    raise BadParameters("population value is only available for FGT, Sen and Kakwani indices")


def true_sigma2_gini(spec: DistributionSpec) -> float:
    """Asymptotic variance of ``sqrt(n)(GI_n - GI)``, the variance of the Gini influence function."""
    if spec.family == "pareto" and spec.params[0] <= 2:
        raise NonIntegrable("pareto with alpha <= 2 has infinite variance")
    mu = spec.mean
    g = true_gini(spec)

    def psi(u):
        x = float(spec.ppf(u))
        return (x * (2 * u - 1) + 2 * float(spec.tail_integral(u)) - g * x) / mu

    m1 = _quad(psi, 0.0, 1.0, "influence mean")
    m2 = _quad(lambda u: psi(u) ** 2, 0.0, 1.0, "influence second moment")
    return m2 - m1 * m1


# Bahadur remainder ---------------------------------------------------------

def bahadur_components(n: int, seed: int) -> tuple[float, float, float]:
    """``(sup|alpha_n + gamma_n|, sup|alpha_n|, sup|gamma_n|)`` for a fresh uniform sample.

    ``alpha_n(s) = sqrt(n)(U_n(s) - s)`` is the uniform empirical process and
    ``gamma_n(s) = sqrt(n)(V_n(s) - s)`` the uniform quantile process, so the
    sum is the Kiefer-Bahadur remainder. Suprema are taken over a ``4n``
    midpoint grid together with every jump point of either process, using
    both one-sided limits there; between jumps the sum is linear in ``s``,
    so this is the exact supremum.
    """
    n = _check_n(n, 10)
    u = np.sort(_open_uniforms(uniform_stream(seed), n))
    s = np.unique(np.concatenate([(np.arange(4 * n) + 0.5) / (4 * n), u, np.arange(1, n + 1) / n]))
    emp = np.searchsorted(u, s, side="right") / n
    emp_left = np.searchsorted(u, s, side="left") / n
    # V_n is left-continuous: V_n(s) = U_(ceil(ns)); its right limit is U_(floor(ns)+1)
    qv = u[np.clip(np.ceil(n * s - 1e-9).astype(int), 1, n) - 1]
    qv_right = u[np.clip(np.floor(n * s + 1e-9).astype(int) + 1, 1, n) - 1]
    rt = math.sqrt(n)
    rem = max(
        np.abs(emp + qv - 2 * s).max(),
        np.abs(emp_left + qv - 2 * s).max(),
        np.abs(emp + qv_right - 2 * s).max(),
    )
    a = max(np.abs(emp - s).max(), np.abs(emp_left - s).max())
    g = max(np.abs(qv - s).max(), np.abs(qv_right - s).max())
    return rt * rem, rt * a, rt * g


def bahadur_remainder(n: int, seed: int) -> float:
    """``sup_s |alpha_n(s) + gamma_n(s)|`` for ``n`` uniforms drawn with ``seed``."""
    return bahadur_components(n, seed)[0]


# studies --------------------------------------------------------------------

_TARGETS = ("sigma2_GI", "sigma2_delta_gini", "sigma2_delta_gpi", "sigma2_R")


@dataclass(frozen=True)
class SimulationPlan:
    """What to simulate.

    ``target`` is one of ``sigma2_GI`` (one marginal) or ``sigma2_delta_gini``,
    ``sigma2_delta_gpi``, ``sigma2_R`` (two marginals and a copula; the last
    two need ``gpi``).
    """

    n: int
    replicates: int
    seed: int
    marginals: tuple
    copula: Optional[CopulaSpec] = None
    target: str = "sigma2_GI"
    gpi: Optional[GpiConfig] = None
    level: float = 0.95
    tolerance: Optional[float] = None

    def __post_init__(self):
        _check_n(self.n, 2)
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise BadParameters("replicates must be >= 1")
        _check_seed(self.seed)
        object.__setattr__(self, "marginals", tuple(self.marginals))
        if self.target not in _TARGETS:
            raise BadParameters(f"unknown target {self.target!r}; choose from {list(_TARGETS)}")
        k = len(self.marginals)
        if self.target == "sigma2_GI":
            if k != 1:
                raise BadParameters("sigma2_GI needs exactly one marginal")
        else:
            if k != 2 or self.copula is None:
                raise BadParameters(f"{self.target} needs two marginals and a copula")
            if self.target != "sigma2_delta_gini" and self.gpi is None:
                raise BadParameters(f"{self.target} needs a poverty index")
        if not 0 < self.level < 1:
            raise BadParameters("level must lie in (0, 1)")

    @property
    def default_tolerance(self) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return 0.25 if self.target == "sigma2_R" else 0.15

    def describe(self) -> dict:
        return {
            "n": self.n,
            "replicates": self.replicates,
            "seed": self.seed,
            "marginals": [m.label for m in self.marginals],
            "copula": self.copula.label if self.copula else None,
            "target": self.target,
            "gpi": self.gpi.label if self.gpi else None,
            "level": self.level,
            "tolerance": self.default_tolerance,
        }


def worker_count() -> int:
    """Worker threads from ``GINIFIELD_THREADS`` (default 1)."""
    raw = os.environ.get("GINIFIELD_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise BadParameters(f"GINIFIELD_THREADS={raw!r} is not an integer") from None
    return max(1, k)


def _statistic_truth(plan: SimulationPlan) -> float:
    m = plan.marginals
    if plan.target == "sigma2_GI":
        return true_gini(m[0])
    dgi = true_gini(m[1]) - true_gini(m[0])
    if plan.target == "sigma2_delta_gini":
        return dgi
    dj = true_gpi(m[1], plan.gpi) - true_gpi(m[0], plan.gpi)
    if plan.target == "sigma2_delta_gpi":
        return dj
    return dj / dgi


def _one_replicate(plan: SimulationPlan, r: int):
    """``(statistic, plug-in variance, ci_lower, ci_upper)`` for replicate ``r``."""
    z = normal_quantile(0.5 + plan.level / 2.0)
    if plan.target == "sigma2_GI":
        dist = make_distribution(sample_univariate(plan.marginals[0], plan.n, plan.seed, r))
        rep = sigma2_GI(build_plugin_context(dist))
        g = gini_point(dist).value
        lo, hi = gini_ci(dist, plan.level, rep)
        return g, rep.sigma2, lo, hi
    paired = sample_paired(plan.copula, plan.marginals[0], plan.marginals[1], plan.n, plan.seed, r)
    ctx = build_two_phase(paired, plan.gpi)
    if plan.target == "sigma2_R":
        rr = ratio_inference(ctx, plan.level)
        return rr.R, rr.sigma2_R, rr.ci.lower, rr.ci.upper
    if plan.target == "sigma2_delta_gini":
        stat, s2 = delta_gini(ctx), sigma2_delta_gini(ctx).sigma2
    else:
        stat, s2 = delta_gpi(ctx), sigma2_delta_gpi(ctx).sigma2
    half = z * math.sqrt(s2 / plan.n)
    return stat, s2, stat - half, stat + half


@dataclass(frozen=True)
class ReplicateTable:
    statistic: np.ndarray
    plugin_sigma2: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    runtime: float

    def to_csv(self) -> str:
        lines = ["replicate,statistic,plugin_sigma2,ci_lower,ci_upper"]
        for r, row in enumerate(zip(self.statistic, self.plugin_sigma2, self.ci_lower, self.ci_upper)):
            lines.append(f"{r}," + ",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def run_replicates(plan: SimulationPlan, threads: int | None = None) -> ReplicateTable:
    """Run every replicate of ``plan``; rows are ordered by replicate index."""
    t0 = time.perf_counter()
    k = worker_count() if threads is None else max(1, int(threads))
    idx = range(plan.replicates)
    if k == 1:
        rows = [_one_replicate(plan, r) for r in idx]
    else:
        with ThreadPoolExecutor(max_workers=k) as pool:
            rows = list(pool.map(lambda r: _one_replicate(plan, r), idx))
    arr = np.array(rows, dtype=float).reshape(plan.replicates, 4)
    return ReplicateTable(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], time.perf_counter() - t0)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a simulation study.

    ``truth`` is the population value of the statistic (GI, dGI, dJ or R);
    ``mc_estimate`` is ``n`` times the across-replicate variance of the
    statistic and ``plugin_median`` the median plug-in variance.
    """

    target: str
    truth: float
    mc_estimate: float
    plugin_median: float
    relative_gap: float
    coverage: Optional[float]
    passed: bool
    runtime: float
    plan: dict = field(default_factory=dict)
    kind: str = "variance_agreement"

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _summaries(plan: SimulationPlan, table: ReplicateTable):
    mc = float(plan.n * np.var(table.statistic, ddof=1)) if plan.replicates > 1 else float("nan")
    med = float(np.median(table.plugin_sigma2))
    gap = abs(med - mc) / mc if mc > 0 else float("inf")
    return mc, med, gap


def variance_agreement(plan: SimulationPlan, threads: int | None = None) -> ValidationReport:
    """Median plug-in variance against ``n * Var_MC`` of the statistic."""
    table = run_replicates(plan, threads)
    mc, med, gap = _summaries(plan, table)
    truth = _statistic_truth(plan)
    cov = float(np.mean((table.ci_lower <= truth) & (truth <= table.ci_upper)))
    return ValidationReport(
        plan.target, truth, mc, med, gap, cov, bool(gap < plan.default_tolerance), table.runtime, plan.describe()
    )


def coverage_band(level: float, replicates: int) -> float:
    """Half-width of the acceptance band around the nominal level (3.5 binomial s.e., at least 0.01)."""
    return max(0.01, 3.5 * math.sqrt(level * (1 - level) / replicates))


def coverage_study(plan: SimulationPlan, level: float | None = None, threads: int | None = None) -> ValidationReport:
    """Fraction of replicates whose interval at ``level`` covers the population value."""
    if level is not None:
        plan = replace(plan, level=level)
    table = run_replicates(plan, threads)
    mc, med, gap = _summaries(plan, table)
    truth = _statistic_truth(plan)
    cov = float(np.mean((table.ci_lower <= truth) & (truth <= table.ci_upper)))
    band = plan.tolerance if plan.tolerance is not None else coverage_band(plan.level, plan.replicates)
    return ValidationReport(
        plan.target, truth, mc, med, gap, cov, bool(abs(cov - plan.level) <= band), table.runtime,
        plan.describe(), kind="coverage",
    )

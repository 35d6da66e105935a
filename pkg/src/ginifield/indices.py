"""Point estimators: empirical Gini, the A_n statistic and the generalized poverty index."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, ZeroMean, ZeroNormalizer
from .sample import EmpiricalDistribution

__all__ = [
    "GiniEstimate",
    "GpiConfig",
    "GpiEstimate",
    "gini_point",
    "a_statistic",
    "gpi_point",
    "fgt_direct",
    "sen_direct",
    "kakwani_direct",
    "pairwise_gini",
]


@dataclass(frozen=True)
class GiniEstimate:
    value: float
    a_statistic: float
    mean: float
    n: int


def a_statistic(dist: EmpiricalDistribution, midrank: bool = False) -> float:
    """``A_n = (1/n) sum_j (j/n) X_{j,n}``.

    With ``midrank=True`` the weights are ``(2j - 1)/(2n)`` instead.
    """
    n = dist.n
    j = np.arange(1, n + 1, dtype=float)
    w = (j - 0.5) / n if midrank else j / n
    return float(np.dot(w, dist.values_sorted) / n)


def gini_point(dist: EmpiricalDistribution) -> GiniEstimate:
    """Empirical Gini index ``(1/mu_n)(1/n) sum_j ((2j-1)/n - 1) X_{j,n}``.

    The weights sum to zero, so the order statistics are shifted by the
    sample minimum before summing; this keeps nearly-equal samples accurate
    and makes constant samples return exactly 0.
    """
    if not dist.mean > 0:
        raise ZeroMean("sample mean must be positive")
    n = dist.n
    x = dist.values_sorted
    w = 2.0 * np.arange(1, n + 1) - 1.0 - n
    value = float(np.dot(w, x - x[0]) / (n * n * dist.mean))
    return GiniEstimate(value, a_statistic(dist), dist.mean, n)


def pairwise_gini(values) -> float:
    """Mean-difference form ``sum_ij |x_i - x_j| / (2 n^2 mu)``; O(n^2), for checking."""
    x = np.asarray(values, dtype=float)
    n = x.size
    return float(np.abs(x[:, None] - x[None, :]).sum() / (2.0 * n * n * x.mean()))


def _as_vector(fn: Callable, arg: np.ndarray, what: str) -> np.ndarray:
    try:
        out = np.broadcast_to(np.asarray(fn(arg), dtype=float), arg.shape)
    except Exception as exc:  # noqa: BLE001 - user callables can fail any way
        raise ConfigError(f"{what} could not be evaluated: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise ConfigError(f"{what} is undefined (non-finite) at a required point")
    return out


@dataclass(frozen=True)
class GpiConfig:
    """Parametrization of the generalized poverty index.

    ``weight`` and ``deprivation`` must accept numpy arrays. ``scale`` is
    called as ``scale(Q, n, Z)``. ``residual_g`` (a function of income) and
    ``residual_nu`` (a function on (0, 1)) describe the index's linearization
    and are only needed for two-period variances; the FGT presets fill them
    in exactly, other presets leave them empty.
    """

    poverty_line: float
    weight: Callable = field(repr=False)
    deprivation: Callable = field(repr=False)
    scale: Callable = field(repr=False)
    mu1: float = 0.0
    mu2: float = 0.0
    mu3: float = 0.0
    mu4: float = 0.0
    residual_g: Optional[Callable] = field(default=None, repr=False)
    residual_nu: Optional[Callable] = field(default=None, repr=False)
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.poverty_line) and self.poverty_line > 0):
            raise ConfigError("poverty line Z must be a positive real")
        d0 = _as_vector(self.deprivation, np.zeros(1), "deprivation d(0)")[0]
        if d0 != 0 and self.kind == "custom":
            warnings.warn(f"deprivation function has d(0) = {d0} != 0", stacklevel=3)

    @property
    def has_residuals(self) -> bool:
        return self.residual_g is not None and self.residual_nu is not None

    @property
    def label(self) -> str:
        if self.kind == "fgt":
            return f"fgt:{self.params['alpha']:g}"
        if self.kind == "kakwani":
            return f"kakwani:{self.params['kappa']:g}"
        return self.kind

    @classmethod
    def fgt(cls, poverty_line: float, alpha: float) -> "GpiConfig":
        if alpha < 0:
            raise ConfigError("FGT alpha must be non-negative")
        z = float(poverty_line)

        def g(x):
            x = np.asarray(x, dtype=float)
            y = np.clip((z - x) / z, 0.0, 1.0)
            return np.where(x < z, y**alpha, 0.0)

        return cls(
            z,
            weight=np.ones_like,
            deprivation=lambda y: np.asarray(y, dtype=float) ** alpha,
            scale=lambda q, n, zz: float(n),
            residual_g=g,
            residual_nu=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
            kind="fgt",
            params={"alpha": float(alpha)},
        )

    @classmethod
    def sen(cls, poverty_line: float) -> "GpiConfig":
        return cls(
            float(poverty_line),
            weight=lambda t: np.asarray(t, dtype=float),
            deprivation=lambda y: np.asarray(y, dtype=float),
            scale=lambda q, n, zz: n * (n + 1) / (q + 1),
            mu1=0.0,
            mu2=1.0,
            mu3=1.0,
            mu4=1.0,
            kind="sen",
        )

    @classmethod
    def kakwani(cls, poverty_line: float, kappa: float) -> "GpiConfig":
        if not kappa > 0:
            raise ConfigError("Kakwani kappa must be positive")

        def scale(q, n, zz):
            j = np.arange(1, n + 1, dtype=float) ** kappa
            return q * j.sum() / j[:q].sum()

        return cls(
            float(poverty_line),
            weight=lambda t: np.asarray(t, dtype=float) ** kappa,
            deprivation=lambda y: np.asarray(y, dtype=float),
            scale=scale,
            mu1=0.0,
            mu2=1.0,
            mu3=1.0,
            mu4=1.0,
            kind="kakwani",
            params={"kappa": float(kappa)},
        )


@dataclass(frozen=True)
class GpiEstimate:
    value: float
    poor_count: int
    normalizer: float


def poor_count(dist: EmpiricalDistribution, z: float) -> int:
    """Number of incomes strictly below the poverty line."""
    return int(np.searchsorted(dist.values_sorted, z, side="left"))


def gpi_point(dist: EmpiricalDistribution, cfg: GpiConfig) -> GpiEstimate:
    """Generalized poverty index of a sample.

    ``J_n = A(Q,n,Z) / (n B) * sum_{j<=Q} w(mu1 n + mu2 Q - mu3 j + mu4) d((Z - X_j)/Z)``
    with ``B = sum_{j<=n} w(j)`` and ``Q`` the number of incomes below ``Z``.
    """
    if not dist.mean > 0:
        raise ZeroMean("sample mean must be positive")
    n = dist.n
    z = cfg.poverty_line
    q = poor_count(dist, z)
    b = float(_as_vector(cfg.weight, np.arange(1, n + 1, dtype=float), "weight w").sum())
    if b == 0:
        raise ZeroNormalizer("normalizer B = sum w(j) is zero")
    if q == 0:
        return GpiEstimate(0.0, 0, b)
    j = np.arange(1, q + 1, dtype=float)
    w = _as_vector(cfg.weight, cfg.mu1 * n + cfg.mu2 * q - cfg.mu3 * j + cfg.mu4, "weight w")
    y = np.clip((z - dist.values_sorted[:q]) / z, 0.0, np.nextafter(1.0, 0.0))
    d = _as_vector(cfg.deprivation, y, "deprivation d")
    a = float(cfg.scale(q, n, z))
    if not np.isfinite(a):
        raise ConfigError("scale A(Q, n, Z) is not finite")
    return GpiEstimate(float(a / (n * b) * np.dot(w, d)), q, b)


def fgt_direct(dist: EmpiricalDistribution, z: float, alpha: float) -> float:
    """Foster-Greer-Thorbecke index ``(1/n) sum_{X<Z} ((Z-X)/Z)^alpha``."""
    x = dist.values_sorted
    poor = x[x < z]
    return float(np.sum(((z - poor) / z) ** alpha) / dist.n)


def sen_direct(dist: EmpiricalDistribution, z: float) -> float:
    """Sen index ``2/(n(Q+1)) sum_{j<=Q} (Q-j+1)(Z-X_j)/Z``."""
    q = poor_count(dist, z)
    if q == 0:
        return 0.0
    j = np.arange(1, q + 1)
    gaps = (z - dist.values_sorted[:q]) / z
    return float(2.0 / (dist.n * (q + 1)) * np.dot(q - j + 1, gaps))


def kakwani_direct(dist: EmpiricalDistribution, z: float, kappa: float) -> float:
    """Kakwani index ``Q/(n sum_{j<=Q} j^k) sum_{j<=Q} (Q-j+1)^k (Z-X_j)/Z``."""
    q = poor_count(dist, z)
    if q == 0:
        return 0.0
    j = np.arange(1, q + 1, dtype=float)
    gaps = (z - dist.values_sorted[:q]) / z
    return float(q / (dist.n * np.sum(j**kappa)) * np.dot((q - j + 1) ** kappa, gaps))
